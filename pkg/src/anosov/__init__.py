"""Critical exponents, entropies and limit-set dimensions for discrete
groups of matrices, with Hilbert-geometry comparison tools."""

__version__ = "0.1.0"

from .errors import (AnosovError, ConfigurationError, InputError,
                     NumericError, ResourceBudgetError, UnsupportedModeError)
from .linalg import (CartanVector, DualProjPoint, LinearForm, ProjPoint,
                     ProximalityInfo, SquareMatrix, attracting_pair,
                     cartan_projection, cartan_projection_many, epsilon_form,
                     jordan_projection, jordan_projection_many,
                     opposition_involution, proj_distance, proximality_gaps,
                     root_form, sym_distance, weight_form)
from .reps import (dual_rep, exterior_power, principal_sl2, sym_square,
                   tensor_product)
from .words import (Ball, BallEntry, ConjClassEntry, ConjugacyClasses,
                    GeneratorSet, Word, enumerate_ball,
                    enumerate_conjugacy_classes, free_ball_size, word_matrix,
                    write_ball_csv, write_classes_csv)
from .exponents import (CountSeries, ExponentEstimate, ball_truncation,
                        class_truncation, completeness_cut, count_series,
                        count_series_from_values, critical_exponent, entropy,
                        poincare_series)
from .scenarios import (Cocycle, Scenario, build_scenario, list_scenarios,
                        parse_config, scenario_from_config)
from .limitset import (DimensionEstimate, SymLimitPoint, box_dimension,
                       distortion_check, dual_metric, line_metric,
                       sample_limit_set, sym_metric)
from .hilbert import (BoundaryPoint, ConvexDomain, GromovMetric,
                      boundary_from_direction, boundary_point,
                      comparison_ratio, domain_center, ellipsoid,
                      gromov_product, gromov_quasi_distance, hilbert_distance,
                      hilbert_distances_from, psd_cone,
                      quasi_metric_dimension, translation_length_hilbert)
from .report import VerificationReport, run_verify, write_report
