r"""Levi-Civita tensor algebra on coordinate derivative arrays.

Every routine here works on plain numpy arrays of metric derivatives and knows
nothing about where the derivatives came from, so the same formulas serve the
analytic horizontal metric and the finite-difference oracle.

Index layout: derivative indices come first, so ``dg[a, i, j]`` is
:math:`\partial_a g_{ij}` and ``ddg[a, b, i, j]`` is
:math:`\partial_a\partial_b g_{ij}`.  Christoffel arrays are ``G[c, a, b]``
for :math:`\Gamma^c_{ab}`.

Curvature sign: ``R[a, b, c, d]`` is the fully covariant tensor with
:math:`R_{abab} > 0` on round spheres, i.e.

.. math::

    R^{\rho}{}_{\sigma\mu\nu} = \partial_\mu\Gamma^\rho_{\nu\sigma}
        - \partial_\nu\Gamma^\rho_{\mu\sigma}
        + \Gamma^\rho_{\mu\lambda}\Gamma^\lambda_{\nu\sigma}
        - \Gamma^\rho_{\nu\lambda}\Gamma^\lambda_{\mu\sigma},
    \qquad R_{\rho\sigma\mu\nu} = g_{\rho\alpha} R^\alpha{}_{\sigma\mu\nu},

and Ricci is :math:`R_{bd} = g^{ac} R_{abcd}`.
"""

import numpy as np

__all__ = [
    "christoffel",
    "christoffel_deriv",
    "inverse_deriv",
    "riemann_lower",
    "ricci",
    "scalar",
    "covariant_hessian",
    "laplacian",
]


def christoffel(g_inv, dg):
    r"""Christoffel symbols :math:`\Gamma^c_{ab}` from :math:`g^{-1}` and
    :math:`\partial g`."""
    # T[d, a, b] = d_a g_bd + d_b g_ad - d_d g_ab
    t = (np.einsum("abd->dab", dg) + np.einsum("bad->dab", dg) - dg)
    return 0.5 * np.einsum("cd,dab->cab", g_inv, t)


def inverse_deriv(g_inv, dg):
    r""":math:`\partial_e g^{cd} = -g^{cp}\,\partial_e g_{pq}\,g^{qd}`."""
    return -np.einsum("cp,epq,qd->ecd", g_inv, dg, g_inv)


def christoffel_deriv(g_inv, dg, ddg):
    r"""Derivatives :math:`\partial_e\Gamma^c_{ab}`, returned as ``dG[e, c, a, b]``."""
    dg_inv = inverse_deriv(g_inv, dg)
    t = (np.einsum("abd->dab", dg) + np.einsum("bad->dab", dg) - dg)
    # dt[e, d, a, b] = d_e (d_a g_bd + d_b g_ad - d_d g_ab)
    dt = (np.einsum("eabd->edab", ddg) + np.einsum("ebad->edab", ddg)
          - np.einsum("edab->edab", ddg))
    return 0.5 * (np.einsum("ecd,dab->ecab", dg_inv, t)
                  + np.einsum("cd,edab->ecab", g_inv, dt))


def riemann_lower(g, G, dG):
    """Fully covariant Riemann tensor ``R[r, s, m, n]`` (sphere-positive sign)."""
    # R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s} - G^r_{n l} G^l_{m s}
    up = (np.einsum("mrns->rsmn", dG) - np.einsum("nrms->rsmn", dG)
          + np.einsum("rml,lns->rsmn", G, G) - np.einsum("rnl,lms->rsmn", G, G))
    return np.einsum("ra,asmn->rsmn", g, up)


def ricci(g_inv, riem):
    """Ricci tensor :math:`R_{bd} = g^{ac} R_{abcd}`."""
    return np.einsum("ac,abcd->bd", g_inv, riem)


def scalar(g_inv, ric):
    return float(np.einsum("ab,ab->", g_inv, ric))


def covariant_hessian(G, df, ddf):
    r""":math:`\nabla_{ij} f = \partial_{ij} f - \Gamma^k_{ij}\partial_k f`."""
    return ddf - np.einsum("kij,k->ij", G, df)


def laplacian(g_inv, G, df, ddf):
    return float(np.einsum("ij,ij->", g_inv, covariant_hessian(G, df, ddf)))
