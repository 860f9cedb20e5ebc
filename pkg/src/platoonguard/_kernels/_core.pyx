# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled physics kernel: one beacon interval of longitudinal dynamics.

Operation-for-operation mirror of ``pure.py`` — identical expressions,
evaluation order, and clamping branches, so both backends produce
byte-identical trajectories.  Keep the two files in sync line by line.
"""

from libc.math cimport sin


def advance_interval(double[::1] x, double[::1] v, double[::1] u, double[::1] a_cmd,
                     double[::1] e_hold, double[::1] uf_hold, double[::1] head, double[::1] roff,
                     long[::1] mode, unsigned char[::1] halted, unsigned char[::1] collided,
                     double[::1] noise_d, double[::1] phys, int n_sub, double t0, list events):
    cdef int N = x.shape[0]
    cdef double L = phys[0]
    cdef double KP = phys[1]
    cdef double KD = phys[2]
    cdef double LEADER_GAIN = phys[3]
    cdef double A_MIN = phys[4]
    cdef double A_MAX = phys[5]
    cdef double ACC_LAMBDA = phys[6]
    cdef double V_BASE = phys[7]
    cdef double V_AMP = phys[8]
    cdef double OMEGA = phys[9]
    cdef double DT = phys[10]

    cdef int s, i
    cdef long m
    cdef double t, vt, a, h, e, edot, udot, un, d, rel, eps, T, vn

    for s in range(n_sub):
        t = t0 + s * DT
        for i in range(N):
            if halted[i]:
                a_cmd[i] = 0.0
                continue
            m = mode[i]
            if m == 0:
                vt = V_BASE + V_AMP * sin(OMEGA * t)
                a = LEADER_GAIN * (vt - v[i])
                if a < A_MIN:
                    a = A_MIN
                elif a > A_MAX:
                    a = A_MAX
                u[i] = a
                a_cmd[i] = a
            elif m == 1:
                h = head[i]
                edot = (v[i - 1] - v[i]) - h * u[i]
                udot = (-u[i] + KP * e_hold[i] + KD * edot + uf_hold[i]) / h
                un = u[i] + udot * DT
                if un < A_MIN:
                    un = A_MIN
                elif un > A_MAX:
                    un = A_MAX
                u[i] = un
                a_cmd[i] = un
            elif m == 2:
                h = head[i]
                d = x[i - 1] - L - x[i] + noise_d[i]
                e = d - (roff[i] + h * v[i])
                edot = (v[i - 1] - v[i]) - h * u[i]
                udot = (-u[i] + KP * e + KD * edot) / h
                un = u[i] + udot * DT
                if un < A_MIN:
                    un = A_MIN
                elif un > A_MAX:
                    un = A_MAX
                u[i] = un
                a_cmd[i] = un
            else:
                T = head[i]
                d = x[i - 1] - L - x[i] + noise_d[i]
                rel = v[i - 1] - v[i]
                eps = -(d - roff[i]) + T * v[i]
                a = -(-rel + ACC_LAMBDA * eps) / T
                if a < A_MIN:
                    a = A_MIN
                elif a > A_MAX:
                    a = A_MAX
                u[i] = a
                a_cmd[i] = a
        for i in range(N):
            if halted[i]:
                continue
            vn = v[i] + a_cmd[i] * DT
            if vn < 0.0:
                vn = 0.0
            v[i] = vn
            x[i] = x[i] + vn * DT
        for i in range(1, N):
            if not collided[i] and x[i - 1] - L - x[i] <= 0.0:
                collided[i] = 1
                halted[i] = 1
                halted[i - 1] = 1
                v[i] = 0.0
                v[i - 1] = 0.0
                a_cmd[i] = 0.0
                a_cmd[i - 1] = 0.0
                events.append((s, i))
