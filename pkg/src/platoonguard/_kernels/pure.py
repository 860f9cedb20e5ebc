"""Pure-Python physics kernel: one beacon interval of longitudinal dynamics.

Reference implementation; the compiled kernel in ``_core.pyx`` mirrors this
function operation-for-operation (same expressions, same evaluation order,
same clamping branches) so both produce byte-identical trajectories.  Keep the
two files in sync line by line when changing either.

Controller modes: 0 = leader speed tracking, 1 = cooperative (beacon-fed
spacing error and front command, sampled and held by the caller), 2 = degraded
cooperative (live radar distance, no front command), 3 = ACC.

``phys`` packs the constants (indices documented in sim.py): vehicle length,
spacing gains, clamps, leader speed profile, and the physics step.
"""

from math import sin


def advance_interval(x, v, u, a_cmd, e_hold, uf_hold, head, roff,
                     mode, halted, collided, noise_d, phys, n_sub, t0, events):
    N = len(x)
    L = float(phys[0])
    KP = float(phys[1])
    KD = float(phys[2])
    LEADER_GAIN = float(phys[3])
    A_MIN = float(phys[4])
    A_MAX = float(phys[5])
    ACC_LAMBDA = float(phys[6])
    V_BASE = float(phys[7])
    V_AMP = float(phys[8])
    OMEGA = float(phys[9])
    DT = float(phys[10])

    xs = x.tolist()
    vs = v.tolist()
    us = u.tolist()
    ac = a_cmd.tolist()
    eh = e_hold.tolist()
    uf = uf_hold.tolist()
    hd = head.tolist()
    ro = roff.tolist()
    md = mode.tolist()
    ha = halted.tolist()
    co = collided.tolist()
    nd = noise_d.tolist()

    for s in range(n_sub):
        t = t0 + s * DT
        for i in range(N):
            if ha[i]:
                ac[i] = 0.0
                continue
            m = md[i]
            if m == 0:
                vt = V_BASE + V_AMP * sin(OMEGA * t)
                a = LEADER_GAIN * (vt - vs[i])
                if a < A_MIN:
                    a = A_MIN
                elif a > A_MAX:
                    a = A_MAX
                us[i] = a
                ac[i] = a
            elif m == 1:
                h = hd[i]
                edot = (vs[i - 1] - vs[i]) - h * us[i]
                udot = (-us[i] + KP * eh[i] + KD * edot + uf[i]) / h
                un = us[i] + udot * DT
                if un < A_MIN:
                    un = A_MIN
                elif un > A_MAX:
                    un = A_MAX
                us[i] = un
                ac[i] = un
            elif m == 2:
                h = hd[i]
                d = xs[i - 1] - L - xs[i] + nd[i]
                e = d - (ro[i] + h * vs[i])
                edot = (vs[i - 1] - vs[i]) - h * us[i]
                udot = (-us[i] + KP * e + KD * edot) / h
                un = us[i] + udot * DT
                if un < A_MIN:
                    un = A_MIN
                elif un > A_MAX:
                    un = A_MAX
                us[i] = un
                ac[i] = un
            else:
                T = hd[i]
                d = xs[i - 1] - L - xs[i] + nd[i]
                rel = vs[i - 1] - vs[i]
                eps = -(d - ro[i]) + T * vs[i]
                a = -(-rel + ACC_LAMBDA * eps) / T
                if a < A_MIN:
                    a = A_MIN
                elif a > A_MAX:
                    a = A_MAX
                us[i] = a
                ac[i] = a
        for i in range(N):
            if ha[i]:
                continue
            vn = vs[i] + ac[i] * DT
            if vn < 0.0:
                vn = 0.0
            vs[i] = vn
            xs[i] = xs[i] + vn * DT
        for i in range(1, N):
            if not co[i] and xs[i - 1] - L - xs[i] <= 0.0:
                co[i] = 1
                ha[i] = 1
                ha[i - 1] = 1
                vs[i] = 0.0
                vs[i - 1] = 0.0
                ac[i] = 0.0
                ac[i - 1] = 0.0
                events.append((s, i))

    x[:] = xs
    v[:] = vs
    u[:] = us
    a_cmd[:] = ac
    halted[:] = ha
    collided[:] = co
