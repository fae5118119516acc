"""BSDF models evaluated in the local shading frame (normal = +z).

Kinds: diffuse elastomer skin, rough dielectric support structure
(GGX microfacets, Smith shadowing, exact unpolarized Fresnel, Walter-style
transmission), smooth conductor for the chrome probe ball, and a normalized
modified Phong lobe for the baseline comparisons.

Conventions:
* eval returns the BSDF value only (no cosine, no pdf),
* wo points toward the camera side of the transport, wi toward the light,
* radiance transport compresses by eta^2 across refractive boundaries;
  the adjoint flag selects importance transport (used by light subpaths),
* delta lobes evaluate to zero and sample with value = weight/|cos|, pdf = 1.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DIFFUSE = 0
ROUGH_DIELECTRIC = 1
SMOOTH_CONDUCTOR = 2
PHONG = 3

KIND_NAMES = {
    "diffuse": DIFFUSE,
    "rough_dielectric": ROUGH_DIELECTRIC,
    "smooth_conductor": SMOOTH_CONDUCTOR,
    "phong": PHONG,
}

INV_PI = 1.0 / np.pi


@njit(cache=True, nogil=True, inline="always")
def onb(n):
    """Branchless orthonormal basis (tangent, bitangent) for unit n."""
    s = 1.0 if n[2] >= 0.0 else -1.0
    a = -1.0 / (s + n[2])
    b = n[0] * n[1] * a
    t = np.empty(3)
    t[0] = 1.0 + s * n[0] * n[0] * a
    t[1] = s * b
    t[2] = -s * n[0]
    bt = np.empty(3)
    bt[0] = b
    bt[1] = s + n[1] * n[1] * a
    bt[2] = -n[1]
    return t, bt


@njit(cache=True, nogil=True, inline="always")
def to_local(t, b, n, v):
    out = np.empty(3)
    out[0] = v[0] * t[0] + v[1] * t[1] + v[2] * t[2]
    out[1] = v[0] * b[0] + v[1] * b[1] + v[2] * b[2]
    out[2] = v[0] * n[0] + v[1] * n[1] + v[2] * n[2]
    return out


@njit(cache=True, nogil=True, inline="always")
def to_world(t, b, n, v):
    out = np.empty(3)
    out[0] = v[0] * t[0] + v[1] * b[0] + v[2] * n[0]
    out[1] = v[0] * t[1] + v[1] * b[1] + v[2] * n[1]
    out[2] = v[0] * t[2] + v[1] * b[2] + v[2] * n[2]
    return out


@njit(cache=True, nogil=True)
def fresnel_dielectric(cos_i, eta):
    """Unpolarized Fresnel reflectance; eta = transmitted/incident ior ratio.

    Returns 1.0 under total internal reflection; eta == 1 reflects nothing.
    """
    ci = abs(cos_i)
    if ci > 1.0:
        ci = 1.0
    sin2_t = (1.0 - ci * ci) / (eta * eta)
    if sin2_t >= 1.0:
        return 1.0
    ct = np.sqrt(1.0 - sin2_t)
    r_par = (eta * ci - ct) / (eta * ci + ct)
    r_perp = (ci - eta * ct) / (ci + eta * ct)
    return 0.5 * (r_par * r_par + r_perp * r_perp)


@njit(cache=True, nogil=True)
def ggx_d(cos_h, alpha):
    """GGX normal distribution; integrates to 1 against cos over the hemisphere."""
    if cos_h <= 0.0:
        return 0.0
    a2 = alpha * alpha
    d = cos_h * cos_h * (a2 - 1.0) + 1.0
    return a2 / (np.pi * d * d)


@njit(cache=True, nogil=True, inline="always")
def smith_g1(cos_v, alpha):
    """Smith masking for GGX, one direction (chi+ handled by the caller)."""
    c2 = cos_v * cos_v
    tan2 = (1.0 - c2) / c2
    return 2.0 / (1.0 + np.sqrt(1.0 + alpha * alpha * tan2))


@njit(cache=True, nogil=True, inline="always")
def _schlick(f0, cos_i):
    m = 1.0 - abs(cos_i)
    m2 = m * m
    return f0 + (1.0 - f0) * m2 * m2 * m


@njit(cache=True, nogil=True, inline="always")
def _reflect_z(wo):
    wi = np.empty(3)
    wi[0] = -wo[0]
    wi[1] = -wo[1]
    wi[2] = wo[2]
    return wi


@njit(cache=True, nogil=True)
def _rough_eval_canonical(albedo, eta_rel, alpha, wo, wi):
    """Rough dielectric eval with wo canonicalized to the upper hemisphere.

    eta_rel = ior(wi side) / ior(wo side) for transmission geometry.
    Radiance-mode value; the adjoint applies eta_rel^2 outside.
    """
    out = np.zeros(3)
    if wo[2] <= 1e-9 or abs(wi[2]) <= 1e-9:
        return out
    if wi[2] > 0.0:  # reflection
        hx = wo[0] + wi[0]
        hy = wo[1] + wi[1]
        hz = wo[2] + wi[2]
        hl = np.sqrt(hx * hx + hy * hy + hz * hz)
        if hl < 1e-12:
            return out
        hx /= hl
        hy /= hl
        hz /= hl
        c_o = wo[0] * hx + wo[1] * hy + wo[2] * hz
        c_i = wi[0] * hx + wi[1] * hy + wi[2] * hz
        if c_o <= 0.0 or c_i <= 0.0:
            return out
        f = fresnel_dielectric(c_o, eta_rel)
        d = ggx_d(hz, alpha)
        g = smith_g1(wo[2], alpha) * smith_g1(wi[2], alpha)
        val = f * d * g / (4.0 * wo[2] * wi[2])
        out[0] = albedo[0] * val
        out[1] = albedo[1] * val
        out[2] = albedo[2] * val
        return out
    # transmission: wi below the surface
    hx = -(eta_rel * wi[0] + wo[0])
    hy = -(eta_rel * wi[1] + wo[1])
    hz = -(eta_rel * wi[2] + wo[2])
    hl = np.sqrt(hx * hx + hy * hy + hz * hz)
    if hl < 1e-12:
        return out
    hx /= hl
    hy /= hl
    hz /= hl
    if hz < 0.0:
        hx, hy, hz = -hx, -hy, -hz
    c_o = wo[0] * hx + wo[1] * hy + wo[2] * hz
    c_i = wi[0] * hx + wi[1] * hy + wi[2] * hz
    if c_o <= 0.0 or c_i >= 0.0:  # microfacet must face wo and transmit to wi
        return out
    f = fresnel_dielectric(c_o, eta_rel)
    if f >= 1.0:
        return out
    d = ggx_d(hz, alpha)
    g = smith_g1(wo[2], alpha) * smith_g1(abs(wi[2]), alpha)
    denom = eta_rel * c_i + c_o
    val = (abs(c_i) * c_o / (abs(wi[2]) * wo[2])) * (1.0 - f) * g * d / (denom * denom)
    out[0] = albedo[0] * val
    out[1] = albedo[1] * val
    out[2] = albedo[2] * val
    return out


@njit(cache=True, nogil=True)
def _rough_pdf_canonical(eta_rel, alpha, wo, wi):
    if wo[2] <= 1e-9 or abs(wi[2]) <= 1e-9:
        return 0.0
    if wi[2] > 0.0:
        hx = wo[0] + wi[0]
        hy = wo[1] + wi[1]
        hz = wo[2] + wi[2]
        hl = np.sqrt(hx * hx + hy * hy + hz * hz)
        if hl < 1e-12:
            return 0.0
        hx /= hl
        hy /= hl
        hz /= hl
        c_o = wo[0] * hx + wo[1] * hy + wo[2] * hz
        if c_o <= 0.0:
            return 0.0
        f = fresnel_dielectric(c_o, eta_rel)
        return f * ggx_d(hz, alpha) * hz / (4.0 * c_o)
    hx = -(eta_rel * wi[0] + wo[0])
    hy = -(eta_rel * wi[1] + wo[1])
    hz = -(eta_rel * wi[2] + wo[2])
    hl = np.sqrt(hx * hx + hy * hy + hz * hz)
    if hl < 1e-12:
        return 0.0
    hx /= hl
    hy /= hl
    hz /= hl
    if hz < 0.0:
        hx, hy, hz = -hx, -hy, -hz
    c_o = wo[0] * hx + wo[1] * hy + wo[2] * hz
    c_i = wi[0] * hx + wi[1] * hy + wi[2] * hz
    if c_o <= 0.0 or c_i >= 0.0:
        return 0.0
    f = fresnel_dielectric(c_o, eta_rel)
    if f >= 1.0:
        return 0.0
    denom = eta_rel * c_i + c_o
    jac = eta_rel * eta_rel * abs(c_i) / (denom * denom)
    return (1.0 - f) * ggx_d(hz, alpha) * hz * jac


@njit(cache=True, nogil=True)
def bsdf_eval(kind, albedo, ior, rough, exponent, spec_w, wo, wi, adjoint):
    """BSDF value f(wo, wi); zero for delta lobes."""
    out = np.zeros(3)
    if kind == SMOOTH_CONDUCTOR:
        return out
    if kind == ROUGH_DIELECTRIC:
        # eta_rel = ior(opposite side of wo) / ior(wo side)
        if wo[2] < 0.0:  # canonicalize: flip the frame, swap media
            wof = np.array([wo[0], wo[1], -wo[2]])
            wif = np.array([wi[0], wi[1], -wi[2]])
            val = _rough_eval_canonical(albedo, 1.0 / ior, rough, wof, wif)
        else:
            val = _rough_eval_canonical(albedo, ior, rough, wo, wi)
        if adjoint and (wo[2] * wi[2] < 0.0):
            eta_wi = 1.0 if wi[2] > 0.0 else ior
            eta_wo = 1.0 if wo[2] > 0.0 else ior
            r = eta_wi / eta_wo
            val = val * (r * r)
        return val
    # opaque, two-sided models: flip to the wo hemisphere
    woz = wo[2]
    wiz = wi[2]
    if woz < 0.0:
        woz = -woz
        wiz = -wiz
    if woz <= 1e-9 or wiz <= 1e-9:
        return out
    if kind == DIFFUSE:
        out[0] = albedo[0] * INV_PI
        out[1] = albedo[1] * INV_PI
        out[2] = albedo[2] * INV_PI
        return out
    # PHONG: diffuse term + normalized specular lobe about the mirror direction
    cos_a = -wo[0] * wi[0] - wo[1] * wi[1] + woz * wiz  # dot(wi, mirror(wo))
    spec = 0.0
    if cos_a > 0.0 and spec_w > 0.0:
        spec = spec_w * (exponent + 2.0) / (2.0 * np.pi) * cos_a ** exponent
    out[0] = albedo[0] * INV_PI + spec
    out[1] = albedo[1] * INV_PI + spec
    out[2] = albedo[2] * INV_PI + spec
    return out


@njit(cache=True, nogil=True)
def bsdf_pdf(kind, albedo, ior, rough, exponent, spec_w, wo, wi):
    """Solid-angle density used by bsdf_sample; 0 for delta lobes."""
    if kind == SMOOTH_CONDUCTOR:
        return 0.0
    if kind == ROUGH_DIELECTRIC:
        if wo[2] < 0.0:
            wof = np.array([wo[0], wo[1], -wo[2]])
            wif = np.array([wi[0], wi[1], -wi[2]])
            return _rough_pdf_canonical(1.0 / ior, rough, wof, wif)
        return _rough_pdf_canonical(ior, rough, wo, wi)
    woz = wo[2]
    wiz = wi[2]
    if woz < 0.0:
        woz = -woz
        wiz = -wiz
    if woz <= 1e-9 or wiz <= 1e-9:
        return 0.0
    if kind == DIFFUSE:
        return wiz * INV_PI
    # phong mixture
    kd = max(albedo[0], max(albedo[1], albedo[2]))
    total = kd + spec_w
    if total <= 0.0:
        return 0.0
    p_diff = kd / total
    pdf = p_diff * wiz * INV_PI
    cos_a = -wo[0] * wi[0] - wo[1] * wi[1] + woz * wiz
    if cos_a > 0.0:
        pdf += (1.0 - p_diff) * (exponent + 1.0) / (2.0 * np.pi) * cos_a ** exponent
    return pdf


@njit(cache=True, nogil=True)
def _cosine_sample(u1, u2):
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    wi = np.empty(3)
    wi[0] = r * np.cos(phi)
    wi[1] = r * np.sin(phi)
    wi[2] = np.sqrt(max(0.0, 1.0 - u1))
    return wi


@njit(cache=True, nogil=True)
def bsdf_sample(kind, albedo, ior, rough, exponent, spec_w, wo, u1, u2, u3, adjoint):
    """Sample wi given wo.

    Returns (wi, value, pdf, is_delta, is_transmission); pdf == 0 flags an
    invalid/absorbed sample. Delta lobes return value = weight/|cos| and
    pdf = 1 so that beta *= value*|cos|/pdf works uniformly.
    """
    wi = np.zeros(3)
    val = np.zeros(3)
    if abs(wo[2]) < 1e-9:
        return wi, val, 0.0, False, False

    if kind == SMOOTH_CONDUCTOR:
        wi = _reflect_z(wo)
        inv_cos = 1.0 / abs(wi[2])
        val[0] = _schlick(albedo[0], wo[2]) * inv_cos
        val[1] = _schlick(albedo[1], wo[2]) * inv_cos
        val[2] = _schlick(albedo[2], wo[2]) * inv_cos
        return wi, val, 1.0, True, False

    if kind == ROUGH_DIELECTRIC:
        flip = wo[2] < 0.0
        wof = np.array([wo[0], wo[1], abs(wo[2])])
        eta_rel = (1.0 / ior) if flip else ior
        # sample a microfacet normal from D * cos
        tan2 = rough * rough * u1 / max(1.0 - u1, 1e-12)
        cos_m = 1.0 / np.sqrt(1.0 + tan2)
        sin_m = np.sqrt(max(0.0, 1.0 - cos_m * cos_m))
        phi = 2.0 * np.pi * u2
        m = np.empty(3)
        m[0] = sin_m * np.cos(phi)
        m[1] = sin_m * np.sin(phi)
        m[2] = cos_m
        c_o = wof[0] * m[0] + wof[1] * m[1] + wof[2] * m[2]
        if c_o <= 1e-9:
            return wi, val, 0.0, False, False
        f = fresnel_dielectric(c_o, eta_rel)
        transmit = u3 >= f  # F = 1 under TIR routes everything to reflection
        wif = np.empty(3)
        if not transmit:
            wif[0] = 2.0 * c_o * m[0] - wof[0]
            wif[1] = 2.0 * c_o * m[1] - wof[1]
            wif[2] = 2.0 * c_o * m[2] - wof[2]
            if wif[2] <= 1e-9:
                return wi, val, 0.0, False, False
        else:
            inv_eta = 1.0 / eta_rel
            sin2_t = (1.0 - c_o * c_o) * inv_eta * inv_eta
            if sin2_t >= 1.0:
                return wi, val, 0.0, False, False
            ct = np.sqrt(1.0 - sin2_t)
            wif[0] = -wof[0] * inv_eta + (c_o * inv_eta - ct) * m[0]
            wif[1] = -wof[1] * inv_eta + (c_o * inv_eta - ct) * m[1]
            wif[2] = -wof[2] * inv_eta + (c_o * inv_eta - ct) * m[2]
            if wif[2] >= -1e-9:
                return wi, val, 0.0, False, False
        pdf = _rough_pdf_canonical(eta_rel, rough, wof, wif)
        if pdf <= 0.0:
            return wi, val, 0.0, False, False
        val = _rough_eval_canonical(albedo, eta_rel, rough, wof, wif)
        if adjoint and transmit:
            val = val * (eta_rel * eta_rel)
        if flip:
            wi[0] = wif[0]
            wi[1] = wif[1]
            wi[2] = -wif[2]
        else:
            wi = wif
        return wi, val, pdf, False, transmit

    # opaque two-sided lobes in the canonical frame
    flip = wo[2] < 0.0
    wof = np.array([wo[0], wo[1], abs(wo[2])])
    if kind == DIFFUSE:
        wif = _cosine_sample(u1, u2)
        pdf = wif[2] * INV_PI
        if pdf <= 0.0:
            return wi, val, 0.0, False, False
        val[0] = albedo[0] * INV_PI
        val[1] = albedo[1] * INV_PI
        val[2] = albedo[2] * INV_PI
    else:  # PHONG
        kd = max(albedo[0], max(albedo[1], albedo[2]))
        total = kd + spec_w
        if total <= 0.0:
            return wi, val, 0.0, False, False
        p_diff = kd / total
        if u3 < p_diff:
            wif = _cosine_sample(u1, u2)
        else:
            cos_a = u1 ** (1.0 / (exponent + 1.0))
            sin_a = np.sqrt(max(0.0, 1.0 - cos_a * cos_a))
            phi = 2.0 * np.pi * u2
            lobe = np.empty(3)
            lobe[0] = sin_a * np.cos(phi)
            lobe[1] = sin_a * np.sin(phi)
            lobe[2] = cos_a
            wr = _reflect_z(wof)  # mirror of wo about the normal
            t, b = onb(wr)
            wif = to_world(t, b, wr, lobe)
            if wif[2] <= 1e-9:
                return wi, val, 0.0, False, False
        pdf = bsdf_pdf(kind, albedo, ior, rough, exponent, spec_w, wof, wif)
        if pdf <= 0.0:
            return wi, val, 0.0, False, False
        val = bsdf_eval(kind, albedo, ior, rough, exponent, spec_w, wof, wif, adjoint)
    if flip:
        wi[0] = wif[0]
        wi[1] = wif[1]
        wi[2] = -wif[2]
    else:
        wi = wif
    return wi, val, pdf, False, False
