"""Network-wide distribution of the TOA position error bound in PPP networks."""

__version__ = "0.1.0"

from .errors import ConfigError, QuadratureError, SingularGeometry
from .geometry import (AnchorAngles, BenchmarkValue, InternodalAngles, compute_d_internodal,
                       compute_d_proposition1, compute_s_from_angles, d_max,
                       internodal_from_angles, sample_uniform_angles)
from .localizability import (NetworkParams, Pmf, p_l_geq, pmf_of_l, pmf_with_reuse,
                             shadow_transform)
from .analytic import (CdfCurve, CondCdfParams, MarginalParams, angle2_cdf, angle2_mean,
                       angle2_var, cond_cdf_s, cond_cdf_s_modified, marginal_cdf_s, tabulate_cdf)
from .simulator import (McEstimate, SimConfig, empirical_cdf, run_conditional_mc, run_d_mc,
                        run_network_mc)
from .infoanalysis import (conditional_entropy_d_given_w, entropy_d, mi_study,
                           mutual_information)
