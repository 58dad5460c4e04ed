"""Depth-based conformal prediction and tolerance regions in separable Hilbert spaces."""

from .backend import available_backends, current_backend, set_backend
from .bootstrap import (BootstrapConfidenceReport, BootstrapToleranceRegion,
                        achieved_confidence, adjusted_quantile, bootstrap_tolerance,
                        confidence_study)
from .config import StudyConfig, load_config
from .conformal import (HeteroscedasticModel, HomoscedasticModel, RegionPredicate,
                        conditional_cdf, conformal_threshold, fit_heteroscedastic,
                        fit_homoscedastic, predict_region_hetero, predict_region_homo)
from .depth import (ConditionalKME, EmpiricalKME, cme_weights, depth_conditional,
                    depth_unconditional, fit_cme, fit_kme)
from .errors import ConfigError, FitError, MismatchError
from .evaluation import (CoverageReport, conditional_coverage_curve, coverage_indicators,
                         l2_coverage_error, marginal_coverage, run_study)
from .hilbert import (HilbertPoint, curve_point, distance, empirical_quantile_function,
                      euclidean_point, inner, norm, pack_points, probability_grid,
                      quantile_point)
from .kernels import (KernelSpec, cross_gram, eval_kernel, gaussian_kernel, gram,
                      median_heuristic, median_pairwise_distance)
from .simgen import (Dataset, gen_distributional, gen_func2func, gen_setting1,
                     gen_setting2, make_dataset, sample_conditional)
from .tolerance import (ToleranceRegion, content_estimate, fit_tolerance,
                        region_contains, tolerance_rank)

__version__ = "0.1.0"
