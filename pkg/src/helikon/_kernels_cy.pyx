# cython: language_level=3, boundscheck=False, cdivision=True
"""Cython theta-series backend for the Weierstrass kernels.

Mirrors helikon._kernels_py function for function; helikon.kernels selects
this module when it is importable (set HELIKON_KERNEL_BACKEND=python to
force the fallback).
"""

cimport cython

cdef extern from "complex.h":
    double complex csin(double complex)
    double complex ccos(double complex)
    double complex cexp(double complex)
    double complex cpow(double complex, double complex)
    double cabs(double complex)

BACKEND = "cython"

DEF MAX_TERMS = 400
DEF TINY = 1e-300

cdef double PI = 3.141592653589793238462643383279502884


@cython.cdivision(True)
cdef double complex _theta1(double complex v, double complex q, double tol):
    cdef double complex total = 0
    cdef double complex term
    cdef double sign = 1.0
    cdef double half
    cdef int small = 0
    cdef int n
    for n in range(MAX_TERMS):
        half = n + 0.5
        term = sign * cpow(q, half * half) * csin((2 * n + 1) * v)
        total += term
        if cabs(term) < tol * (cabs(total) + TINY):
            small += 1
            if small >= 2 and n >= 4:
                break
        else:
            small = 0
        sign = -sign
    return 2.0 * total


@cython.cdivision(True)
cdef double complex _theta1_prime(double complex v, double complex q, double tol):
    cdef double complex total = 0
    cdef double complex term
    cdef double sign = 1.0
    cdef double half
    cdef int small = 0
    cdef int n, k
    for n in range(MAX_TERMS):
        half = n + 0.5
        k = 2 * n + 1
        term = sign * k * cpow(q, half * half) * ccos(k * v)
        total += term
        if cabs(term) < tol * (cabs(total) + TINY):
            small += 1
            if small >= 2 and n >= 4:
                break
        else:
            small = 0
        sign = -sign
    return 2.0 * total


@cython.cdivision(True)
cdef double complex _theta1_dprime(double complex v, double complex q, double tol):
    cdef double complex total = 0
    cdef double complex term
    cdef double sign = 1.0
    cdef double half
    cdef int small = 0
    cdef int n, k
    for n in range(MAX_TERMS):
        half = n + 0.5
        k = 2 * n + 1
        term = sign * k * k * cpow(q, half * half) * csin(k * v)
        total += term
        if cabs(term) < tol * (cabs(total) + TINY):
            small += 1
            if small >= 2 and n >= 4:
                break
        else:
            small = 0
        sign = -sign
    return -2.0 * total


def theta1(v, q, tol):
    """Jacobi theta_1(v, q) by its sine q-series."""
    return _theta1(v, q, tol)


def theta1_prime(v, q, tol):
    """d/dv theta_1(v, q)."""
    return _theta1_prime(v, q, tol)


def theta1_dprime(v, q, tol):
    """d^2/dv^2 theta_1(v, q)."""
    return _theta1_dprime(v, q, tol)


def theta1_triple_prime0(q, tol):
    """d^3/dv^3 theta_1 at v = 0."""
    cdef double complex qq = q
    cdef double ttol = tol
    cdef double complex total = 0
    cdef double complex term
    cdef double sign = 1.0
    cdef double half
    cdef int n, k
    for n in range(MAX_TERMS):
        half = n + 0.5
        k = 2 * n + 1
        term = sign * (k * k * k) * cpow(qq, half * half)
        total += term
        if cabs(term) < ttol * (cabs(total) + TINY) and n >= 4:
            break
        sign = -sign
    return -2.0 * total


cdef inline int _round_half(double x):
    # same nearest-integer rule as the python backend (truncation of x +- 0.5)
    if x >= 0:
        return <int>(x + 0.5)
    return <int>(x - 0.5)


def reduce_to_cell(u, tau):
    """Split u = u0 + m + n*tau with the (s, t) coordinates of u0 in
    [-1/2, 1/2).  Returns (u0, m, n)."""
    cdef double complex uu = u
    cdef double complex tt = tau
    cdef double t = uu.imag / tt.imag
    cdef double s = uu.real - t * tt.real
    cdef int m = _round_half(s)
    cdef int n = _round_half(t)
    return uu - m - n * tt, m, n


def sigma_raw(u, tau, q, eta1, eta2, tol):
    """Weierstrass sigma(u) on the lattice <1, tau>."""
    cdef double complex uu = u
    cdef double complex tt = tau
    cdef double complex qq = q
    cdef double complex e1 = eta1
    cdef double complex e2 = eta2
    cdef double ttol = tol
    cdef double t = uu.imag / tt.imag
    cdef double s = uu.real - t * tt.real
    cdef int m = _round_half(s)
    cdef int n = _round_half(t)
    cdef double complex u0 = uu - m - n * tt
    cdef double complex t1p0 = _theta1_prime(0, qq, ttol)
    cdef double complex s0 = (
        cexp(0.5 * e1 * u0 * u0) * _theta1(PI * u0, qq, ttol) / (PI * t1p0)
    )
    if m == 0 and n == 0:
        return s0
    cdef double complex eta = m * e1 + n * e2
    cdef double complex omega = m + n * tt
    cdef double sign = -1.0 if (m + n + m * n) % 2 else 1.0
    return sign * s0 * cexp(eta * (u0 + 0.5 * omega))


def zeta_raw(u, tau, q, eta1, eta2, tol):
    """Weierstrass zeta(u) on the lattice <1, tau>."""
    cdef double complex uu = u
    cdef double complex tt = tau
    cdef double complex qq = q
    cdef double complex e1 = eta1
    cdef double complex e2 = eta2
    cdef double ttol = tol
    cdef double t = uu.imag / tt.imag
    cdef double s = uu.real - t * tt.real
    cdef int m = _round_half(s)
    cdef int n = _round_half(t)
    cdef double complex u0 = uu - m - n * tt
    cdef double complex v = PI * u0
    cdef double complex z0 = e1 * u0 + PI * _theta1_prime(v, qq, ttol) / _theta1(v, qq, ttol)
    return z0 + m * e1 + n * e2


def wp_raw(u, tau, q, eta1, tol):
    """Weierstrass p-function on the lattice <1, tau>."""
    cdef double complex uu = u
    cdef double complex tt = tau
    cdef double complex qq = q
    cdef double complex e1 = eta1
    cdef double ttol = tol
    cdef double t = uu.imag / tt.imag
    cdef double s = uu.real - t * tt.real
    cdef double complex u0 = uu - _round_half(s) - _round_half(t) * tt
    cdef double complex v = PI * u0
    cdef double complex t1 = _theta1(v, qq, ttol)
    cdef double complex t1p = _theta1_prime(v, qq, ttol)
    cdef double complex t1pp = _theta1_dprime(v, qq, ttol)
    return -e1 + PI * PI * (t1p * t1p - t1pp * t1) / (t1 * t1)


def wp_prime_raw(u, tau, q, eta1, eta2, tol):
    """Derivative of the p-function, via sigma(2u) = -wp'(u) sigma(u)^4."""
    cdef double complex uu = u
    cdef double complex tt = tau
    cdef double t = uu.imag / tt.imag
    cdef double s = uu.real - t * tt.real
    cdef double complex u0 = uu - _round_half(s) - _round_half(t) * tt
    s1 = sigma_raw(u0, tau, q, eta1, eta2, tol)
    s2 = sigma_raw(2.0 * u0, tau, q, eta1, eta2, tol)
    return -s2 / (s1 * s1 * s1 * s1)
