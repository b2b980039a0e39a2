"""
Curating shortage-list snapshots
================================

Runs the full curation pipeline over the bundled synthetic snapshot corpus:
parse the CSV exports, recover 9-digit product codes, collapse repeat
sightings into events, and keep the resolved multi-manufacturer cases as
ground-truth trajectories.
"""

from pathlib import Path

from pharmsim.dataset import NdcDirectory, curate, dataset_stats
from pharmsim.engine import scenario_from_gt

corpus = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus"

directory = NdcDirectory.from_csv(corpus / "ndc_directory.csv")
result = curate(sorted(corpus.glob("snapshot_*.csv")), directory)

audit = result.audit()
print("rows read:", audit["rows_read"])
print("parsed:", audit["rows_parsed"], " rejected:", audit["rows_rejected"],
      " quarantined:", audit["rows_quarantined"])
print("distinct events:", audit["events"])

print("\nevents:")
for event in result.events:
    mark = "resolved" if event.resolved else "ongoing"
    print(f"  {event.event_id:<28} {event.reason_class:<17} {mark}")

print("\nground-truth trajectories:")
for gt in result.build.trajectories:
    print(f"  {gt.case_id}  {gt.dataset:<9} n={gt.n}  T={gt.T}  "
          f"deltas={gt.per_mfr_delta}")
print("excluded:", {e['drug_key'].split('|')[0]: e['reason']
                    for e in result.build.excluded})

print("\ndataset statistics:")
for name, stats in dataset_stats(result.build.trajectories).items():
    print(f"  {name}: {stats}")

# Each kept case converts directly into a runnable scenario.
cfg = scenario_from_gt(result.build.trajectories[0])
print("\nscenario from the first case:", cfg.scenario, cfg.to_dict()["forced"])
