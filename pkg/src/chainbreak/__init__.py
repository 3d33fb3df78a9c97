"""Chain-break benchmarks for clique-embedded Ising problems."""

from .bench import (
    ProblemResult,
    SweepResult,
    aggregate,
    prob_broken,
    prob_success,
    ratio_broken,
    run_sweep,
)
from .chimera import (
    ChimeraGraph,
    EmbeddedModel,
    Embedding,
    build_chimera,
    clique_embed,
    embed_model,
    validate_embedding,
)
from .decode import (
    DISCARDED,
    ChainReadout,
    DecodedSampleSet,
    FaultProfile,
    decode_batch,
    decode_discard,
    decode_majority,
    decode_weighted,
    detect_breaks,
    estimate_fault_profile,
)
from .ising import (
    GroundStateReport,
    IsingModel,
    Qubo,
    brute_force_solve,
    energy_ising,
    energy_qubo,
    ising_to_qubo,
    qubo_to_ising,
)
from .portfolio import PriceData, SuiteConfig, build_qubo, generate_prices, generate_suite
from .sampler import AnnealSchedule, NoiseConfig, PhysicalSampleSet, sample, sweep_metropolis

__version__ = "0.1.0"
