"""Brute-force two-time oracle for the closed coefficient system.

Propagates the two-time functions f_j(t, s_k) along their characteristics
(each past time s_k starts at t = s_k from the diagonal initial data),
co-evolves the two-time fbar5(t, s_k), and rebuilds the single-time
integrals by composite trapezoid quadrature. Nothing here calls the closed
ODE right-hand side; it is only used afterwards for the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import SystemParams
from .coefficients import correlation_alpha, integrate_coefficients


@dataclass
class TwoTimeGrid:
    """Two-time functions at a fixed t on the nodes ``s_nodes <= t``."""

    t: float
    s_nodes: np.ndarray
    f: np.ndarray              # (n_nodes, 4)
    fbar5_two_time: np.ndarray  # (n_nodes,)


@dataclass
class OracleReport:
    t: np.ndarray
    fbar_quad: np.ndarray      # (n+1, 4)
    fbar_ode: np.ndarray       # (n+1, 4)
    check_t: np.ndarray
    ftilde5_quad: np.ndarray
    big_f_quad: np.ndarray     # (n_check, 5)
    coeffs_ode_check: np.ndarray  # (n_check, 10)
    factorization_error: float
    final_grid: TwoTimeGrid | None = field(default=None, repr=False)

    @property
    def fbar_deviation(self) -> float:
        if self.fbar_quad.size == 0:
            return 0.0
        return float(np.max(np.abs(self.fbar_quad - self.fbar_ode)))

    @property
    def ftilde5_deviation(self) -> float:
        if self.check_t.size == 0:
            return 0.0
        return float(np.max(np.abs(self.ftilde5_quad - self.coeffs_ode_check[:, 4])))

    @property
    def big_f_deviation(self) -> float:
        if self.check_t.size == 0:
            return 0.0
        return float(np.max(np.abs(self.big_f_quad - self.coeffs_ode_check[:, 5:])))


def _trap_weights(n_nodes: int, h: float) -> np.ndarray:
    w = np.full(n_nodes, h)
    if n_nodes == 1:
        return np.zeros(1)
    w[0] = w[-1] = 0.5 * h
    return w


def _pde_rhs(f, f5b, fbar, p: SystemParams):
    """Characteristic derivatives of f_j(t, s) for all nodes at once."""
    b1, b2, b3, b4 = fbar
    ka, kb = p.kappa_a, p.kappa_b
    f1, f2, f3, f4 = f[:, 0], f[:, 1], f[:, 2], f[:, 3]
    shared = 2j * p.j_z + ka * b4 + kb * b3
    da = 2j * p.omega_a + ka * b1 + kb * b3
    db = 2j * p.omega_b + ka * b4 + kb * b2
    xa = -1j * p.j_xy - kb * b1 + kb * b4
    xb = -1j * p.j_xy - ka * b2 + ka * b3
    out = np.empty_like(f)
    out[:, 0] = da * f1 + xa * f3 + shared * f4 - 1j * kb * f5b
    out[:, 1] = db * f2 + xb * f4 + shared * f3 - 1j * ka * f5b
    out[:, 2] = db * f3 + xb * f1 + shared * f2 - 1j * ka * f5b
    out[:, 3] = da * f4 + xa * f2 + shared * f1 - 1j * kb * f5b
    return out


def two_time_oracle(p: SystemParams, t_final: float, n_s: int,
                    n_check: int = 8, rtol: float = 1e-11,
                    atol: float = 1e-13) -> OracleReport:
    """Rebuild fbar_j, ftilde5 and F_j by quadrature and compare to the ODEs.

    The t-step equals the s-grid spacing ``t_final / n_s``; each step is a
    classical RK4 step in which fbar_j at intermediate times includes the
    sliver between the last node and the current time by a trapezoid.
    ``n_check`` evenly spaced times (plus t_final) get the O(n^2) double
    quadratures for ftilde5 and F_j.
    """
    if n_s < 1:
        raise ValueError("n_s must be positive")
    gamma = p.gamma
    diag = np.array([p.kappa_a, p.kappa_b, 0.0, 0.0], dtype=complex)
    h = t_final / n_s
    s_all = np.linspace(0.0, t_final, n_s + 1)
    check_idx = (np.unique(np.linspace(0, n_s, n_check + 1).round().astype(int))
                 if t_final > 0 else np.array([0]))

    def fbar_at(tau, t_last, f_nodes, n_nodes):
        s = s_all[:n_nodes]
        w = _trap_weights(n_nodes, h)
        a = correlation_alpha(tau, s, gamma)
        val = (w * a) @ f_nodes
        sliver = tau - t_last
        if sliver > 0:
            val = val + 0.5 * sliver * (a[-1] * f_nodes[-1]
                                        + correlation_alpha(tau, tau, gamma) * diag)
        return val

    f = diag[None, :].copy()
    f5b = np.zeros(1, dtype=complex)
    f5_diag = np.zeros(n_s + 1, dtype=complex)
    fbar_hist = np.zeros((n_s + 1, 4), dtype=complex)
    rate_log = np.zeros(n_s + 1, dtype=complex)  # integral of the fbar5 rate
    ftilde5_q, big_f_q = [], []

    def double_quad(n_nodes, f_nodes, f5_nodes, tau):
        s = s_all[:n_nodes]
        w = _trap_weights(n_nodes, h)
        kernel = correlation_alpha(s[:, None], s[None, :], gamma) * np.outer(w, w)
        left = kernel @ f_nodes                    # sum over s2
        fq = np.conj(f5_nodes) @ left              # sum over s1
        f5q = np.conj(f5_nodes) @ (kernel @ f5_nodes)
        ft = (w * correlation_alpha(tau, s, gamma)) @ f5_nodes
        return ft, np.concatenate([fq, [f5q]])

    def rate(fb):
        return (-gamma + 2j * (p.omega_a + p.omega_b)
                + 2 * p.kappa_a * fb[0] + 2 * p.kappa_b * fb[1])

    if 0 in check_idx:
        ft, bf = double_quad(1, f, f5b, 0.0)
        ftilde5_q.append(ft)
        big_f_q.append(bf)

    for n in range(n_s):
        t_n = s_all[n]
        m = n + 1

        def stage(tau, fs, f5s):
            fb = fbar_at(tau, t_n, fs, m)
            return _pde_rhs(fs, f5s, fb, p), rate(fb) * f5s, rate(fb)

        k1f, k1g, r1 = stage(t_n, f, f5b)
        k2f, k2g, r2 = stage(t_n + h / 2, f + h / 2 * k1f, f5b + h / 2 * k1g)
        k3f, k3g, r3 = stage(t_n + h / 2, f + h / 2 * k2f, f5b + h / 2 * k2g)
        k4f, k4g, r4 = stage(t_n + h, f + h * k3f, f5b + h * k3g)
        f = f + h / 6 * (k1f + 2 * k2f + 2 * k3f + k4f)
        f5b = f5b + h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g)
        rate_log[m] = rate_log[n] + h / 6 * (r1 + 2 * r2 + 2 * r3 + r4)

        # new characteristic starting on the diagonal s = t_{n+1}
        f = np.vstack([f, diag])
        fb_new = fbar_at(s_all[m], s_all[m], f, m + 1)
        fbar_hist[m] = fb_new
        f5_diag[m] = -1j * (p.kappa_a * fb_new[2] + p.kappa_b * fb_new[3])
        f5b = np.append(f5b, f5_diag[m])

        if m in check_idx:
            ft, bf = double_quad(m + 1, f, f5b, s_all[m])
            ftilde5_q.append(ft)
            big_f_q.append(bf)

    # two-time fbar5 factorizes: fbar5(t, s1) = fbar5(s1, s1) g(t) / g(s1)
    fact = f5_diag * np.exp(rate_log[-1] - rate_log)
    scale = max(1e-300, float(np.max(np.abs(f5b))))
    fact_err = float(np.max(np.abs(fact - f5b))) / scale if np.any(f5b) else 0.0

    ode = integrate_coefficients(p, s_all, exact=True, rtol=rtol, atol=atol)
    return OracleReport(
        t=s_all,
        fbar_quad=fbar_hist,
        fbar_ode=ode.y[:, :4],
        check_t=s_all[check_idx],
        ftilde5_quad=np.array(ftilde5_q),
        big_f_quad=np.array(big_f_q),
        coeffs_ode_check=ode.y[check_idx],
        factorization_error=fact_err,
        final_grid=TwoTimeGrid(t=float(s_all[-1]), s_nodes=s_all.copy(),
                               f=f, fbar5_two_time=f5b),
    )


@dataclass
class ConvergenceStudy:
    n_s: list[int]
    deviations: list[float]

    @property
    def ratios(self) -> list[float]:
        d = self.deviations
        return [d[i] / d[i + 1] if d[i + 1] > 0 else np.inf for i in range(len(d) - 1)]

    @property
    def diverging(self) -> bool:
        """True if refinement fails to shrink the error at least like 1/n_s."""
        return any(r < 2.0 for r, d in zip(self.ratios, self.deviations) if d > 1e-13)


def oracle_convergence(p: SystemParams, t_final: float, n_s_values) -> ConvergenceStudy:
    devs = [two_time_oracle(p, t_final, n).fbar_deviation for n in n_s_values]
    return ConvergenceStudy(list(n_s_values), devs)
