"""Freeze the rank-one curve table used by the pipeline tests.

Curves are scanned from small Weierstrass coefficients and kept when they are
alone in their isogeny class (so the model is the optimal quotient of
X_0(N)) and have analytic and algebraic rank one. For each curve the script
picks p and D, then computes y_K on its own: Heegner forms by brute force,
the q-series sum with PARI's a_n, and the point through PARI's lattice.
"""
import json
import math
import sys
from pathlib import Path

import cypari2

pari = cypari2.Pari()
pari.set_real_precision(60)
pari.allocatemem(2 * 10 ** 9)
OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "data"


def point_json(p):
    x, y = pari(p[0]), pari(p[1])
    return [str(pari.numerator(x)), str(pari.denominator(x)), str(pari.numerator(y)), str(pari.denominator(y))]


def is_fundamental(d):
    # -d fundamental, d > 0
    if d % 4 == 3:
        return int(pari.issquarefree(d)) == 1
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (1, 2) and int(pari.issquarefree(m)) == 1
    return False


def heegner_ds(n, p, bound=300):
    qs = [int(q) for q in pari.factor(n)[0]]
    for d in range(5, bound):
        if d % p == 0 or not is_fundamental(d):
            continue
        if all(int(pari.kronecker(-d, q)) == 1 for q in qs):
            yield d


def reduced_forms(d):
    out = []
    a = 1
    while 3 * a * a <= d:
        for b in range(-a + 1, a + 1):
            if (b * b + d) % (4 * a):
                continue
            c = (b * b + d) // (4 * a)
            if c < a or (c == a and b < 0) or math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return out


def heegner_forms(n, d):
    beta = next(b for b in range(2 * n) if (b * b + d) % (4 * n) == 0)
    targets = {tuple(int(v) for v in pari.qfbred(pari.Qfb(*f))[:3]): f for f in reduced_forms(d)}
    found = {}
    k = 1
    while len(found) < len(targets):
        big_a = n * k
        for big_b in range(beta - 2 * n * k, 2 * n * k, 2 * n):
            if (big_b * big_b + d) % (4 * big_a):
                continue
            c = (big_b * big_b + d) // (4 * big_a)
            if math.gcd(math.gcd(big_a, abs(big_b)), c) != 1:
                continue
            red = tuple(int(v) for v in pari.qfbred(pari.Qfb(big_a, big_b, c))[:3])
            if red in targets and red not in found:
                found[red] = (big_a, big_b, c)
        k += 1
    return beta, list(found.values())


def y_k(e, n, d):
    beta, forms = heegner_forms(n, d)
    taus = [f"(-({b})+sqrt(-{d}))/(2*{a})" for a, b, _ in forms]
    im_min = min(math.sqrt(d) / (2 * a) for a, _, _ in forms)
    terms = int(58 * math.log(10) / (2 * math.pi * im_min)) + 10
    an = pari.ellan(e, terms)
    # evaluated in GP so that realprecision applies throughout
    z = pari(0)
    for t in taus:
        z += pari(f"(an) -> my(q = exp(2*Pi*I*{t}), s = 0., qn = 1.); "
                  f"for(i = 1, {terms}, qn *= q; s += an[i] * qn / i); s")(an)
    for k in range(1, 25):
        pt = pari.ellztopoint(e, k * z)
        if len(pt) == 1:
            return beta, len(forms), terms, None
        x = pari.real(pt[0])
        if abs(float(pari.imag(pt[0]))) > 1e-30:
            continue
        xr = pari.bestappr(x, 10 ** 20)
        ys = pari.ellordinate(e, xr)
        for y in ys:
            cand = [xr, y]
            if abs(float(pari.real(pt[1]) - y)) < 1e-25 and int(pari.ellisoncurve(e, cand)):
                return beta, len(forms), terms, (k, cand)
    return beta, len(forms), terms, "unrecognized"


def candidates(n_max):
    seen = set()
    for a1 in (0, 1):
        for a2 in (-1, 0, 1):
            for a3 in (0, 1):
                for a4 in range(-30, 31):
                    for a6 in range(-30, 31):
                        e = pari.ellinit([a1, a2, a3, a4, a6])
                        if len(e) == 0:
                            continue
                        m = [int(v) for v in pari.ellminimalmodel(e)[:5]]
                        if tuple(m) in seen:
                            continue
                        seen.add(tuple(m))
                        n = int(pari.ellglobalred(pari.ellinit(m))[0])
                        if n <= n_max:
                            yield n, m


def row(n, a, strict=False):
    e = pari.ellinit(a)
    if len(pari.ellisomat(e)[0]) != 1:
        return None
    if int(pari.ellanalyticrank(e)[0]) != 1:
        return None
    r = pari.ellrank(e)
    if int(r[0]) != 1 or int(r[1]) != 1 or len(r[3]) == 0:
        return None
    g = pari.ellsaturation(e, r[3], 1000)[0]
    tors = int(pari.elltors(e)[0])
    tam = {}
    for q in [int(q) for q in pari.factor(n)[0]]:
        tam[q] = int(pari.elllocalred(e, q)[3])
    ps = [p for p in (3, 5, 7, 11, 13) if n % p and tors % p]
    # the mod-3 image is GL_2(F_3) iff psi_3 has Galois group S4
    ps = [p for p in ps if p != 3 or int(pari.polgalois(pari.elldivpol(e, 3))[0]) == 24]
    if strict:
        ps = [p for p in ps if any(c % p == 0 for c in tam.values())] or ps
    p = ps[0]
    for d in heegner_ds(n, p):
        tw = pari.ellinit(pari.elltwist(e, -d))
        if int(pari.ellanalyticrank(tw)[0]) != 0:
            continue
        beta, h, terms, rec = y_k(e, n, d)
        if rec is None or rec == "unrecognized":
            continue
        k, pt = rec
        hy = pari.ellheight(e, pt, precision=256) / (k * k)
        hg = pari.ellheight(e, g, precision=256)
        index = pari.sqrt(hy / hg)
        idx = int(pari.round(index))
        if abs(float(index - idx)) > 1e-30:
            raise RuntimeError(f"non-integral index for {a} D={d}: {index}")
        m0 = int(pari.valuation(idx, p)) if idx else None
        vals = {q: int(pari.valuation(c, p)) for q, c in tam.items()}
        m_max = max(vals.values())
        return {
            "a": a, "conductor": n, "generator": point_json(g), "torsion": tors,
            "tamagawa": {str(q): c for q, c in tam.items()}, "p": p, "d": d, "beta": beta,
            "class_number": h, "y_k_height": str(hy)[:40], "index": idx, "m0": m0, "m_max": m_max,
            "exponent_kolyvagin": 2 * m0, "exponent_improved": 2 * m0 - 2 * m_max,
            "exponent_bsd": 2 * (m0 - sum(vals.values())),
        }
    return None


def record(label, r, with_generator):
    rec = {"label": label, "a": r["a"]}
    if with_generator:
        rec["generator"] = [int(v) for v in r["generator"]]
    rec["notes"] = "alone in its isogeny class; analytic and algebraic rank one"
    return rec


if __name__ == "__main__":
    rows, strict = [], []
    for n, a in sorted(candidates(int(sys.argv[1]) if len(sys.argv) > 1 else 400)):
        r = row(n, a)
        if r is None:
            continue
        rows.append(r)
        print(n, a, r["p"], r["d"], r["index"], r["tamagawa"], file=sys.stderr)
    # fixtures beyond the scanned range where an odd p divides some c_q
    seen = {tuple(r["a"]) for r in rows}
    for n, a in sorted(candidates(3000)):
        if tuple(a) in seen or n <= (int(sys.argv[1]) if len(sys.argv) > 1 else 400):
            continue
        e = pari.ellinit(a)
        tam = [int(pari.elllocalred(e, int(q))[3]) for q in pari.factor(n)[0]]
        if not any(c % p == 0 and n % p for c in tam for p in (3, 5, 7)):
            continue
        r = row(n, a, strict=True)
        if r is not None and r["m_max"] > 0:
            strict.append(r)
            print("strict", n, a, r["p"], r["d"], r["index"], r["tamagawa"], file=sys.stderr)
            if len(strict) >= 2:
                break
    count = {}
    with open(OUT / "rank_one_oracle.jsonl", "w") as f, open(OUT / "rank_one_curves.jsonl", "w") as g:
        g.write("# optimal rank-one curves; generators are saturated, some are left out to exercise the search\n")
        for i, r in enumerate(rows + strict):
            n = r["conductor"]
            count[n] = count.get(n, 0) + 1
            r["label"] = f"N{n}.{count[n]}"
            xn, xd = int(r["generator"][0]), int(r["generator"][1])
            small = abs(xn) <= 100 and int(pari.issquare(xd)) and xd <= 100 ** 2
            f.write(json.dumps(r) + "\n")
            g.write(json.dumps(record(r["label"], r, not (small and i % 4 == 3))) + "\n")
