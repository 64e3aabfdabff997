"""Poisson bracket algebras as structure-constant tables."""

from .canonical import canonical_consistency_check, canonical_generator_bracket
from .casimir import (Polynomial, casimir_bracket, casimir_commutation_check, chart_casimirs,
                      chart_trace_polynomial, quadratic_form, table_trace_polynomial)
from .printed import GROUPS, PrintedReport, mismatch_report
from .tables import (BracketTable, centrality_residual, extended_table, is_rational_table,
                     jacobi_residual, master_table, project_subalgebra)

__all__ = [
    "BracketTable", "GROUPS", "Polynomial", "PrintedReport", "canonical_consistency_check",
    "canonical_generator_bracket", "casimir_bracket", "casimir_commutation_check", "centrality_residual",
    "chart_casimirs", "chart_trace_polynomial", "extended_table", "is_rational_table", "jacobi_residual",
    "master_table", "mismatch_report", "project_subalgebra", "quadratic_form", "table_trace_polynomial",
]
