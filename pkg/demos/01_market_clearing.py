"""
How one quarter clears
======================

Walks through the two-phase allocation mechanism by hand: disrupted plants
produce up to their equal share of the order book, the gap they leave is
spread over the healthy plants, and whatever nobody can make becomes the
shortage.
"""

from pharmsim import ManufacturerState, allocate, buyer_accounting, effective_capacity
from pharmsim.config import SimConfig

cfg = SimConfig()

# Four identical manufacturers in equilibrium: demand 1.0 splits evenly.
states = [ManufacturerState(id=i, base_capacity=0.25) for i in range(4)]
out = allocate(1.0, states)
print("equilibrium quantities:", out.per_mfr_quantity)
print("shortage:", out.shortage)

# Now knock 56% off manufacturer 0 for two quarters.
states[0] = ManufacturerState(id=0, base_capacity=0.25, disruption=(0.56, 2))
print("\nmanufacturer 0 effective capacity:", effective_capacity(states[0]))

out = allocate(1.0, states)
print("quantities under disruption:", out.per_mfr_quantity)
print("unfilled share pooled from disrupted plants:", out.unfilled_from_disrupted)
print("total supply:", out.total_supply, "shortage:", out.shortage)

# The healthy plants were already at capacity, so the pooled share cannot be
# absorbed and the market runs short.  The buyer settles the quarter: it pays
# for what arrived and a penalty on what patients did not get.
acct = buyer_accounting(out.total_supply, cfg.patient_demand, 0.0, cfg)
print("\nbuyer purchase cost:", acct.purchase_cost)
print("unmet patient demand:", round(acct.unmet_patient_demand, 6))
print("stockout penalty:", round(acct.stockout_penalty, 6))
print("total quarter cost:", round(acct.total_cost, 6))
