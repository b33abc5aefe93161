"""Worked example on R^(2|0) with w = (1 + x1) dx1 ^ dx2.

Prints the N tensor, the corrected Christoffel symbols and the verification.
"""

from superfedosov.fedosov import extract_n, fedosov_correct, verify_symplectic
from superfedosov.frontend.expressions import format_superfunction, parse_expression
from superfedosov.supergeometry import BilinearForm, Chart, Connection, TwoForm


def main():
    chart = Chart.standard(2, 0)
    a = parse_expression("1+x1", chart)
    zero = chart.zero()
    omega = TwoForm.from_form(BilinearForm(chart, ((zero, a), (-a, zero))))
    flat = Connection.flat(chart)
    N = extract_n(flat, omega)
    C = fedosov_correct(flat, omega, N)
    names = chart.names
    for label, table in (("N", N.table), ("Gamma", C.christoffel)):
        for i, j, k in ((i, j, k) for i in range(2) for j in range(2) for k in range(2)):
            f = table[i][j][k]
            if not f.is_zero():
                print(f"{label}[{names[i]},{names[j]}]^{names[k]} = {format_superfunction(f, chart)}")
    for check in verify_symplectic(C, omega).checks:
        print(f"{check.name}: {'pass' if check.passed else 'FAIL'} ({check.checked} entries)")


if __name__ == "__main__":
    main()
