"""Tabulation of the quantization-error theory over an (L, N) grid."""
from ..feedback import expected_qe_closed, expected_qe_numeric, qe_case_bound
from .report import RateReport


def qe_table(L_values, N_values):
    records = []
    for L in L_values:
        for N in N_values:
            records.append(dict(
                L=L, N=N,
                E_closed=expected_qe_closed(L, N),
                E_numeric=expected_qe_numeric(L, N),
                bound_caseI=qe_case_bound(L, N, "I"),
                bound_caseII=qe_case_bound(L, N, "II"),
            ))
    return RateReport("qe", records, {})
