"""Quantum star graphs: spectra, eigenfunction statistics, the large-graph
limit law of bond-indicator matrix elements, and scarred subsequences."""
from __future__ import annotations

from ._accel import get_backend, set_backend, set_threads
from .errors import (AccuracyLoss, BudgetExhausted, CoincidentPoles, ComputeError, ConfigError,
                     NoConvergence, PoleProximity, QStarError, RationalLengthWarning)
from .graph import (SmoothObservable, SplitObservable, StarGraph, ensemble_graph, load_graph,
                    make_graph, sample_lengths)
from .limit import (CdfTable, LimitParams, cdf_table, density_f_x_eta, f_tilde, limit_cdf,
                    p_eta, qe_step_cdf, tau_eta)
from .scars import ScarCertificate, find_bunching, scar_sequence, trap_eigenvalue
from .special import erf_complex, erfc_complex, faddeeva, faddeeva_w, integral_zw
from .spectrum import Spectrum, eigenvalues, secular, weyl_deviation
from .statistics import (EmpiricalDistribution, collect_matrix_elements, convergence_study,
                         sup_distance)
from .wavefunction import (build_eigenfunction, indicator_elements, matrix_element_indicator,
                           matrix_element_leading, matrix_element_smooth)

__version__ = "0.1.0"

__all__ = [
    "get_backend",
    "set_backend",
    "set_threads",
    "AccuracyLoss",
    "BudgetExhausted",
    "CoincidentPoles",
    "ComputeError",
    "ConfigError",
    "NoConvergence",
    "PoleProximity",
    "QStarError",
    "RationalLengthWarning",
    "SmoothObservable",
    "SplitObservable",
    "StarGraph",
    "ensemble_graph",
    "load_graph",
    "make_graph",
    "sample_lengths",
    "CdfTable",
    "LimitParams",
    "cdf_table",
    "density_f_x_eta",
    "f_tilde",
    "limit_cdf",
    "p_eta",
    "qe_step_cdf",
    "tau_eta",
    "ScarCertificate",
    "find_bunching",
    "scar_sequence",
    "trap_eigenvalue",
    "erf_complex",
    "erfc_complex",
    "faddeeva",
    "faddeeva_w",
    "integral_zw",
    "Spectrum",
    "eigenvalues",
    "secular",
    "weyl_deviation",
    "EmpiricalDistribution",
    "collect_matrix_elements",
    "convergence_study",
    "sup_distance",
    "build_eigenfunction",
    "indicator_elements",
    "matrix_element_indicator",
    "matrix_element_leading",
    "matrix_element_smooth",
]
