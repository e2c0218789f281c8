"""Builds the golden message corpus directly from the documented byte layout.

Writes NAME.wf (canonical bytes) and NAME.json (JSON mirror) for each fixture.
Digests are computed separately with `sha256sum *.wf > SHA256SUMS`.
"""
import hashlib
import json
import pathlib

US = "\x1f"
HERE = pathlib.Path(__file__).parent
CATEGORY = {
    "P": "ProtectiveSign", "E": "EmergencySignal", "D": "DangerSign", "S": "StatusSignal",
    "I": "InfrastructureSign", "M": "MissionSignal", "Q": "RequestSignal", "R": "ResourceMessage", "F": "FreeText",
}
REFERENCE = {"N": "New", "U": "Update", "C": "Cancel", "A": "Acknowledge", "D": "Duress"}


def fixed(e5):
    sign = "-" if e5 < 0 else ""
    a = abs(e5)
    return f"{sign}{a // 100000}.{a % 100000:05d}"


def build(name, originator, cat, subject, ts, ref="N", target=None, duration=None, geo=None, text=None):
    fields = [
        "1", originator, cat, f"{subject:02d}", ref, target or "", ts,
        "" if duration is None else str(duration),
        "" if geo is None else f"{fixed(geo[0])},{fixed(geo[1])},{geo[2]}",
        text or "",
    ]
    raw = US.join(fields).encode("utf-8")
    (HERE / f"{name}.wf").write_bytes(raw)
    mirror = {
        "version": 1,
        "originator_id": originator,
        "category": CATEGORY[cat],
        "subject_code": subject,
        "reference_indicator": REFERENCE[ref],
        "referenced_hash": target,
        "timestamp": ts,
        "duration": duration,
        "geometry": None if geo is None else {"latitude": geo[0] / 1e5, "longitude": geo[1] / 1e5, "radius_m": geo[2]},
        "payload_text": text,
    }
    (HERE / f"{name}.json").write_text(json.dumps(mirror, indent=2, ensure_ascii=False) + "\n")
    return hashlib.sha256(raw).hexdigest()


h1 = build("p01_hospital", "icrc-geneva", "P", 1, "2026-03-01T08:00:00Z", geo=(1535472, 4420667, 250))
h2 = build("e03_surrender_beacon", "unit-7", "E", 3, "2026-03-01T09:15:30Z", duration=3600, geo=(-1234, -17950000, 30))
build("s01_proof_of_life_duress", "unit-7", "S", 1, "2026-03-01T09:20:00Z", ref="D", target=h2)
build("d02_land_mines_cancel", "demining-ngo", "D", 2, "2026-03-02T00:00:00Z", ref="C", target=h1, geo=(9000000, 18000000, 0))
build("i04_water_treatment", "moh", "I", 4, "2026-03-01T08:00:05Z", geo=(1530000, 4421000, 120))
build("m01_convoy_movement", "wfp-convoy-3", "M", 1, "2026-03-01T10:00:00Z", duration=5400, geo=(1540000, 4410000, 2000))
build("q02_cease_fire_ack", "un-ocha", "Q", 2, "2026-03-01T11:00:00Z", ref="A", target=h1)
build("r04_authenticated_photo", "msf", "R", 4, "2026-03-01T12:00:00Z", text="https://example.org/evidence/0042.jpg#sha256=" + h1)
build("f02_conflict_evidence", "icrc-geneva", "F", 2, "2026-03-01T12:30:00Z", geo=(-8999999, -17999999, 15),
      text="Croix-Rouge peinte sur un véhicule blindé; 装甲車")
