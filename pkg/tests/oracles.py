"""Independent brute-force reference implementations used as test oracles.

These are written directly from the clearing and metric definitions, on
purpose without reusing any package code, so they can disagree with the
implementation when one of the two is wrong.
"""

from __future__ import annotations


def allocate_reference(demand, capacities, disrupted_flags):
    """Two-phase clearing, evaluated literally.

    Disrupted set M_D produces min(D/n, c_i); their unfilled share
    sum((D/n - c_i)+) is split evenly over the undisrupted set M_U, each again
    capped by capacity.  Returns (quantities, total, unfilled, shortage).
    """
    n = len(capacities)
    m_d = {i for i in range(n) if disrupted_flags[i]}
    m_u = {i for i in range(n) if not disrupted_flags[i]}
    share = demand / n

    q = {}
    for i in m_d:
        q[i] = min(share, capacities[i])
    unfilled = sum((share - capacities[i] for i in m_d if share > capacities[i]), 0 * share)
    if m_u:
        extra = unfilled / len(m_u)
        for i in m_u:
            q[i] = min(share + extra, capacities[i])
    total = sum((q[i] for i in sorted(q)), 0 * share)
    shortage = demand - total if demand > total else 0 * share
    return [q[i] for i in range(n)], total, unfilled, shortage


def resolution_time_reference(shortages, eps):
    """Earliest t (1-indexed) from which every later shortage stays within eps; else T+1."""
    horizon = len(shortages)
    for t in range(1, horizon + 1):
        if all(shortages[u - 1] <= eps for u in range(t, horizon + 1)):
            return t
    return horizon + 1


def fip_reference(flags):
    """Share of periods with an announcement, in percent."""
    return 100.0 * sum(1 for f in flags if f) / len(flags)
