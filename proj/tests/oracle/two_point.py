"""Reference values for the two-point fixture at 30 digits.

Regenerate with:  python3 two_point.py > ../support/two_point_oracle.hpp
"""
from mpmath import mp, mpf, log, sqrt, exp

mp.dps = 30

mu = [mpf(1) / 2, mpf(1) / 2]
mut = [mpf("0.3"), mpf("0.7")]
phi = [mpf(0), log(2)]
zero = [mpf(0), mpf(0)]


def post(m, p):
    w = [a * exp(-b) for a, b in zip(m, p)]
    Z = sum(w)
    return [x / Z for x in w], Z


def tv(a, b):
    return sum(abs(x - y) for x, y in zip(a, b)) / 2


def hel(a, b):
    return sqrt(sum((sqrt(x) - sqrt(y)) ** 2 for x, y in zip(a, b)))


def kl(a, b):
    return sum(x * log(x / y) for x, y in zip(a, b) if x > 0)


P, Z = post(mu, phi)
Pt, Zt = post(mut, phi)
A, ZA = post(mu, zero)
B, ZB = post(mu, phi)
L1 = sum(m * abs(x - y) for m, x, y in zip(mu, zero, phi))
L2 = sqrt(sum(m * (x - y) ** 2 for m, x, y in zip(mu, zero, phi)))
eps = mpf("0.1")

v = {}
v["Z"] = Z
v["Z_tilde"] = Zt
v["tv_priors"] = tv(mu, mut)
v["tv_posteriors"] = tv(P, Pt)
v["hellinger_priors"] = hel(mu, mut)
v["kl_priors_forward"] = kl(mu, mut)
v["kl_priors_reverse"] = kl(mut, mu)
v["hellinger_prior_lhs"] = hel(P, Pt)
v["hellinger_prior_rhs"] = 2 / min(Z, Zt) * hel(mu, mut)
v["tv_prior_rhs"] = 2 / Z * tv(mu, mut)
v["kl_prior_lhs"] = kl(P, Pt)
v["kl_prior_rhs"] = (kl(mu, mut) + kl(mut, mu)) / min(Z, Zt)
v["kl_prior_evidence_gap_rhs"] = sqrt(2 * kl(mu, mut))
v["w1_prior_sharp_rhs"] = (1 + mpf(1) / 2) / Zt * (1 + mpf(1) / 2 * mpf(1) / 2 / Z) * tv(mu, mut)
v["w1_prior_simplified_rhs"] = (mpf(3) / 2) ** 2 / min(Z, Zt) ** 2 * tv(mu, mut)
v["L1_diff"] = L1
v["L2_diff"] = L2
v["hellinger_phi_lhs"] = hel(A, B)
v["hellinger_phi_rhs"] = L2 / min(ZA, ZB)
v["tv_phi_lhs"] = tv(A, B)
v["tv_phi_rhs"] = L1 / ZA
v["kl_phi_forward_lhs"] = kl(A, B)
v["kl_phi_reverse_lhs"] = kl(B, A)
v["kl_phi_rhs"] = 2 * L1 / min(ZA, ZB)
v["w1_phi_lhs"] = abs(A[0] - B[0])
v["w1_phi_sharp_rhs"] = (mpf(1) / 2 * L1 + sqrt(mpf(1) / 2) * L2) / ZB
v["w1_phi_simplified_rhs"] = 2 * sqrt(mpf(1) / 2) / min(ZA, ZB) ** 2 * L2
PA = P[0]
v["huber_inf"] = PA / (1 + eps * mpf(1) / 2 / ((1 - eps) * Z))
v["huber_sup"] = ((1 - eps) * Z * PA + eps) / ((1 - eps) * Z + eps)
PB = P[1]
inf1 = PB / (1 + eps / ((1 - eps) * Z))
sup1 = ((1 - eps) * Z * PB + eps / 2) / ((1 - eps) * Z + eps / 2)
v["tv_range"] = max(PA - v["huber_inf"], v["huber_sup"] - PA, PB - inf1, sup1 - PB)
rho = [mpf("-0.2"), mpf("0.2")]
lik = [exp(-x) for x in phi]
d = sum(a * b for a, b in zip(lik, rho))
dT = [lik[i] * (rho[i] - d / Z * mu[i]) / Z for i in range(2)]
v["frechet_0"] = dT[0]
v["frechet_1"] = dT[1]
v["local_sensitivity"] = sum(abs(x) for x in dT)
v["table_hellinger_prior_r01"] = 2 / (Z - 2 * mpf("0.1"))
v["Z_tempered_3"] = (1 + mpf(1) / 8) / 2

print("#pragma once")
print()
print("// Generated by tests/oracle/two_point.py (mpmath, 30 digits).")
print()
print("namespace oracle {")
for k, x in v.items():
    print(f"inline constexpr double {k} = {mp.nstr(x, 20)};")
print("}  // namespace oracle")
