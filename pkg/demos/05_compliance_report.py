"""A two-week compliance report with alerts."""

# %% Setup
from __future__ import annotations

from pathlib import Path

import numpy as np

from wearqc.compliance import ComplianceConfig, compliance_report, report_to_json
from wearqc.ingest import E4Session, ParticipantRecording
from wearqc.intervals import IntervalSet
from wearqc.plotting import plot_compliance, save_svg
from wearqc.signal import UniformSignal

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)
MIDNIGHT = 1585699200.0
DAY = 86400.0


def session(start, hours):
    # flat signals; the report only uses session extents
    n4, n32 = int(hours * 3600 * 4), int(hours * 3600 * 32)
    return E4Session(acc=UniformSignal(start, 32.0, np.zeros((n32, 3))),
                     eda=UniformSignal(start, 4.0, np.zeros(n4)),
                     temp=UniformSignal(start, 4.0, np.zeros(n4)))


# %% Daily sessions of varying length, shorter at weekends
rng = np.random.default_rng(5)
sessions = []
for k in range(14):
    weekend = (k + 2) % 7 >= 5  # 2020-04-01 is a Wednesday
    hours = max(0.5, rng.normal(6 if weekend else 10, 1.5))
    sessions.append(session(MIDNIGHT + k * DAY + 8 * 3600, min(hours, 14)))
labels = {"headache": IntervalSet([(MIDNIGHT + 3 * DAY + 14 * 3600, MIDNIGHT + 3 * DAY + 20 * 3600)])}
rec = ParticipantRecording("demo", sessions, labels)

# %% Report, alerts and figure
doc = compliance_report(rec, ComplianceConfig(tz="Europe/Brussels"), now=MIDNIGHT + 15 * DAY)
days = doc["streams"]["wearable"]
print(f"{sum(d['compliant'] for d in days)}/{len(days)} compliant days")
print(f"overall ratio {doc['ratios']['overall']:.3f}, during headache {doc['ratios']['by_label']['headache']:.3f}")
print("alerts:", [a["message"] for a in doc["alerts"]])
(OUT / "report.json").write_text(report_to_json(doc))
save_svg(plot_compliance(doc), OUT / "compliance.svg")
print("wrote", OUT / "compliance.svg")
