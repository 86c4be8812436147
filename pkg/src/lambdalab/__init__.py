"""Finite laboratory for Lambda(p) character systems and L_1 operator lower bounds."""

SCHEMA_VERSION = "lambdalab-report/1"

from .errors import CapacityError, ConstructionError, DomainError, LabError  # noqa: E402
from .gf2_designs import (CharacterFamily, FieldSpec, IndependenceResult, bch_family,  # noqa: E402
                          embed_family, gf2m_mul, gf2m_pow, generator, independent_family,
                          rademacher_family, random_family, verify_independence)
from .hypercube import (HypercubeFunction, WalshSpectrum, character,  # noqa: E402
                        conditional_expectation, fwht, inner, lp_norm, synthesize)
from .lambda_analysis import (LambdaReport, SignSearchResult, cross_block_check,  # noqa: E402
                              khintchine_estimate, lambda_constant, max_sign_norm, moment_norm,
                              pairing_constant)
from .lemma_lab import (LemmaCertificate, OptimalityReport, lemma_bound,  # noqa: E402
                        optimality_instance, structured_certificate, verify_lemma)
from .operators_l1 import (AtomicMeasureSpace, CharacterOperator, L1Operator,  # noqa: E402
                           adjoint_norm_linf, build_Jp, conditional_expectation_operator,
                           modulus, operator_norm_l1, project_block)
from .separation_lab import (HullDistance, SeparationReport, coverage_experiment,  # noqa: E402
                             dist_set, distance_to_symmetric_hull, fit_exponent, reuse_bound,
                             survivor_analysis)
from .simplex import simplex  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
