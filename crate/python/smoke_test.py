"""Smoke test for the gumbel_moments extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/gumbel_moments-*.whl
"""

import json
import sys

import gumbel_moments as gm


def main() -> int:
    g1 = gm.gamma_n(1)
    assert abs(g1.mid() - 0.5772156649015329) < 1e-15
    assert g1.width() < 1e-30

    eta = gm.eta_n(3, bits=256)
    assert eta.lo(15).startswith("5.658495408")

    d = gm.delta_n(4)
    q = gm.delta_n_quadrature(4)
    assert abs(d.mid() - q.mid()) < 1e-12, (d, q)

    w = gm.lambert_w("1")
    assert abs(w.mid() - 0.5671432904097838) < 1e-15

    p2 = gm.build_p(2)
    assert len(p2) == 5
    assert p2.canonical().splitlines()[0] == "5 ; g4:1"
    assert gm.Poly.parse(p2.canonical()) == p2
    assert p2.eval_at_constants(bits=256).contains_zero()
    assert p2.derivative("g4").canonical() == "5 ;\n"

    csv = gm.tables(2).splitlines()
    assert csv[0] == "n,gamma_n,delta_n,eta_n,delta_tilde_n,eta_tilde_n,bits_used"
    assert csv[2].startswith("1,0.5772156649,0.5963473623,0.7965995992,")
    rows = json.loads(gm.tables(1, json=True))["rows"]
    assert rows[0]["eta_n"] == "0.6321205588"

    recs = gm.certify(3)
    assert len(recs) == 4 + 5 and all(r[2] for r in recs)

    assert int(gm.pascal_submatrix_det(4, "gamma")) > 0
    assert all(ok for _, ok, _ in gm.check(64))

    try:
        gm.build_p(1)
    except ValueError:
        pass
    else:
        raise AssertionError("build_p(1) should raise")

    print("python smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
