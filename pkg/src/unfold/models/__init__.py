from .drill import drill_embed, drill_fit, graphical_lasso
from .eigenmaps import graph_laplacian, laplacian_eigenmaps
from .grf import ConvergenceWarning, GrfModel, grf_embed, meu_log_likelihood
from .isomap import geodesic_distances, isomap
from .lle import (acyclic_log_likelihood, alle_embed, alle_fit, lle_embed, lle_weights,
                  pseudo_log_likelihood)
from .meu import MeuFitConfig, meu_embed, meu_fit, meu_gradient
