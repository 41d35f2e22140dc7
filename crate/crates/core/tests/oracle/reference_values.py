"""High-precision reference values frozen into the Rust test suite.

Run with `python3 reference_values.py`; every value is computed by direct
summation at 150 significant digits (mpmath), independent of the Rust code.
"""
import mpmath as mp

mp.mp.dps = 150


def ml(alpha, beta, z):
    alpha, beta, z = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
    return mp.nsum(lambda n: z**n * mp.rgamma(alpha * n + beta), [0, mp.inf])


def miller_ross(nu, a, t):
    nu, a, t = mp.mpf(nu), mp.mpf(a), mp.mpf(t)
    return t**nu * mp.nsum(lambda n: (a * t)**n * mp.rgamma(nu + n + 1), [0, mp.inf])


def semigroup_solution(q, t):
    alpha = mp.mpf(1) / q
    r = (alpha - 2) / alpha
    s1 = sum(miller_ross(-k * alpha, 1, t) for k in range(q))
    s2 = sum(r**(q - k - 1) * miller_ross(-k * alpha, r**q, t) for k in range(q))
    return (s1 - s2) / (2 * alpha)


def show(label, v):
    print(f"{label} = {mp.nstr(v, 20)}")


show("gamma(8/3)", mp.gamma(mp.mpf(8) / 3))
show("gamma(7/3)", mp.gamma(mp.mpf(7) / 3))
show("gamma(-2.5)", mp.gamma(mp.mpf(-2.5)))
show("gamma(-169.5)", mp.gamma(mp.mpf(-169.5)))
show("gamma(170.5)", mp.gamma(mp.mpf(170.5)))
show("gamma(0.001)", mp.gamma(mp.mpf("0.001")))

print("# E_alpha(x) table")
for a in ["0.3", "0.5", "0.7", "0.9", "1"]:
    for x in ["-5", "-2", "-0.5", "0.5", "2", "5"]:
        show(f"E({a},{x})", ml(a, 1, x))

print("# two-parameter values")
for a, b, x in [("0.5", "2", "-3"), ("0.8", "2", "-6"), ("0.3", "0.3", "-4"),
                ("0.6", "0.6", "-10"), ("0.25", "2", "-20"), ("0.95", "1", "-30")]:
    show(f"E({a},{b},{x})", ml(a, b, x))

# d/du E_alpha(c u^alpha) = (c u^alpha / u) E_{alpha,alpha}(c u^alpha)
show("kernel_dt(0.5,-1,1)", -ml("0.5", "0.5", -1))
show("kernel_dt(0.3,-2,0.7)", (-2 * mp.mpf("0.7")**mp.mpf("0.3") / mp.mpf("0.7"))
     * ml("0.3", "0.3", -2 * mp.mpf("0.7")**mp.mpf("0.3")))

show("miller_ross(-0.5,1,1)", miller_ross("-0.5", 1, 1))
show("miller_ross(-1/3,-125,1)", miller_ross(-mp.mpf(1) / 3, -125, 1))
show("miller_ross(-2/3,-125,1)", miller_ross(-mp.mpf(2) / 3, -125, 1))
show("miller_ross(-0.25,-40,2)", miller_ross("-0.25", -40, 2))
show("miller_ross(0.4,-7,1.5)", miller_ross("0.4", -7, "1.5"))
show("miller_ross(-4/3,-125,0.5)", miller_ross(-mp.mpf(4) / 3, -125, "0.5"))
for t in ["0.5", "1", "2"]:
    show(f"semigroup_solution(3,{t})", semigroup_solution(3, t))


def algebraic_part(beta, z):
    """E_{1,beta}(z) - z^(1-beta) e^z for z > 0, via the upper incomplete gamma."""
    a = mp.mpf(beta) - 1
    if a == 0:
        return mp.mpf(0)
    return -z**(1 - mp.mpf(beta)) * mp.exp(z) * mp.gammainc(a, z, mp.inf) * mp.rgamma(a)


def semigroup_solution_even(q, t):
    # for even q the e^{r^q t} parts cancel across k; summing them directly
    # needs thousands of digits, so only the algebraic parts are kept
    alpha = mp.mpf(1) / q
    r = (alpha - 2) / alpha
    t = mp.mpf(t)
    s1 = sum(miller_ross(-k * alpha, 1, t) for k in range(q))
    s2 = sum(r**(q - k - 1) * t**(-k * alpha) * algebraic_part(1 - k * alpha, r**q * t) for k in range(q))
    return (s1 - s2) / (2 * alpha)


for b, z in [("0.75", 50), ("0.5", 240), ("2", 45), ("0.25", 2401)]:
    show(f"algebraic_part({b},{z})", algebraic_part(b, mp.mpf(z)))
for t in ["0.0001", "0.001", "0.01", "0.1", "0.5", "1", "2"]:
    show(f"semigroup_solution(4,{t})", semigroup_solution_even(4, t))
for t in ["0.001", "0.01", "0.5", "1", "2"]:
    show(f"semigroup_solution(6,{t})", semigroup_solution_even(6, t))
