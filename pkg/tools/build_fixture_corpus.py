"""Regenerate src/fracturelab/data/fixture_corpus.jsonl from the table below.

Each row: text, tri_class, locations, side, stage, implants. Labels are
assigned by hand from the annotation conventions, not from parser output.
"""

import json
from pathlib import Path

F, N, O = "fracture", "normal", "other"

ROWS = [
    # Quoted discrepancy-style sentences
    ("There are chronic rib fractures.", F, ["ribs"], "none", "healed", []),
    ("Bilateral rib fractures are noted.", F, ["ribs"], "both", "other", []),
    ("Stable mid-thoracic compression fracture.", F, ["spine"], "none", "other", []),
    ("An old left clavicular deformity is noted.", F, ["clavicle"], "left", "healed", []),
    ("No displaced fracture is seen.", N, [], "none", "other", []),
    ("No fracture is visualized.", N, [], "none", "other", []),
    ("There are no displaced rib fractures.", N, [], "none", "other", []),
    # Ribs
    ("Acute fracture of the left ribs.", F, ["ribs"], "left", "acute", []),
    ("Nondisplaced fracture of the right seventh rib.", F, ["ribs"], "right", "other", []),
    ("Healed right posterior rib fractures.", F, ["ribs"], "right", "healed", []),
    ("Multiple left-sided rib fractures, some of which appear new.", F, ["ribs"], "left", "acute", []),
    ("Old healed fractures of the left lateral fifth and sixth ribs.", F, ["ribs"], "left", "healed", []),
    ("Subtle fracture of the anterior right fourth rib cannot be excluded.", F, ["ribs"], "right", "other", []),
    ("Possible nondisplaced fracture of the left eighth rib.", F, ["ribs"], "left", "other", []),
    ("Remote left rib fractures are again demonstrated.", F, ["ribs"], "left", "healed", []),
    ("Recent displaced fractures of the right ribs with associated small pneumothorax.", F, ["ribs"], "right", "acute", []),
    ("Rib fx on the left.", F, ["ribs"], "left", "other", []),
    ("Multiple bilateral healed rib fractures are unchanged.", F, ["ribs"], "both", "healed", []),
    ("Left rib fractures and right rib fractures are present.", F, ["ribs"], "both", "other", []),
    ("Chronic fracture deformities of several left ribs.", F, ["ribs"], "left", "healed", []),
    ("There is a new fracture of the right ninth rib.", F, ["ribs"], "right", "acute", []),
    ("Costal cartilage calcification. Old fracture of the right sixth rib.", F, ["ribs"], "right", "healed", []),
    ("Slightly displaced left posterior rib fractures.", F, ["ribs"], "left", "other", []),
    # Clavicle
    ("Acute fracture of the right clavicle.", F, ["clavicle"], "right", "acute", []),
    ("Healed left clavicle fracture.", F, ["clavicle"], "left", "healed", []),
    ("Comminuted fracture of the mid right clavicle.", F, ["clavicle"], "right", "other", []),
    ("Status post ORIF of the left clavicle fracture with plate and screws.", F, ["clavicle"], "left", "other", ["screws", "plates"]),
    ("Right clavicular deformity consistent with old fracture.", F, ["clavicle"], "right", "healed", []),
    ("Distal left clavicle fracture is again noted.", F, ["clavicle"], "left", "other", []),
    ("Plate and screw fixation of a healed right clavicular fracture.", F, ["clavicle"], "right", "healed", ["screws", "plates"]),
    # Shoulder
    ("Acute fracture of the left humeral neck.", F, ["shoulder"], "left", "acute", []),
    ("Old right humeral head fracture.", F, ["shoulder"], "right", "healed", []),
    ("Fracture of the proximal left humerus.", F, ["shoulder"], "left", "other", []),
    ("Healed fracture of the right shoulder with intramedullary nail.", F, ["shoulder"], "right", "healed", ["other"]),
    ("Left shoulder hemiarthroplasty with periprosthetic fracture.", F, ["shoulder"], "left", "other", []),
    ("Fracture of the humerus fixed with a plate and multiple screws.", F, ["shoulder"], "none", "other", ["screws", "plates"]),
    # Spine
    ("Acute compression fracture of the T12 vertebral body.", F, ["spine"], "none", "acute", []),
    ("Chronic compression deformity of L1.", F, ["spine"], "none", "healed", []),
    ("Mild wedge deformity of a mid thoracic vertebra, likely chronic.", F, ["spine"], "none", "healed", []),
    ("Multiple old thoracic vertebral compression fractures.", F, ["spine"], "none", "healed", []),
    ("New compression fracture of T8.", F, ["spine"], "none", "acute", []),
    ("Thoracolumbar fusion rods and pedicle screws with a fracture of the L2 vertebra.", F, ["spine"], "none", "other", ["screws", "rods"]),
    ("Kyphoplasty changes with compression fractures of T11 and T12.", F, ["spine"], "none", "other", []),
    ("Fracture of the lumbar spine, with rods in place.", F, ["spine"], "none", "other", ["rods"]),
    ("Stable vertebral compression fractures.", F, ["spine"], "none", "other", []),
    # Sternum
    ("Acute fracture of the sternum.", F, ["sternum"], "none", "acute", []),
    ("Nondisplaced sternal fracture is seen on the lateral view.", F, ["sternum"], "none", "other", []),
    ("Healed fracture of the manubrium.", F, ["sternum"], "none", "healed", []),
    ("Displaced sternal body fracture.", F, ["sternum"], "none", "other", []),
    # Scapula
    ("Acute fracture of the left scapula.", F, ["scapula"], "left", "acute", []),
    ("Comminuted right scapular fracture.", F, ["scapula"], "right", "other", []),
    ("Old fracture of the right scapula.", F, ["scapula"], "right", "healed", []),
    ("Fracture through the left acromion.", F, ["scapula"], "left", "other", []),
    # Sternal wires
    ("Fracture of the sternal wires.", F, ["sternal wires"], "none", "other", []),
    ("The second sternal wire is fractured.", F, ["sternal wires"], "none", "other", []),
    ("Status post median sternotomy with fractured sternotomy wires.", F, ["sternal wires"], "none", "other", []),
    ("Broken sternal wires are unchanged from prior sternotomy.", F, ["sternal wires"], "none", "other", []),
    ("Fractured and displaced uppermost sternotomy wire.", F, ["sternal wires"], "none", "other", []),
    ("Sternal wire disruption with sternal dehiscence.", F, ["sternal wires", "sternum"], "none", "other", []),
    # Other locations and location-less fractures
    ("Fracture of the left femoral neck is partially imaged.", F, ["other"], "left", "other", []),
    ("Healed fracture of the right forearm with plate.", F, ["other"], "right", "healed", ["plates"]),
    ("Fracture of the other bone.", F, ["other"], "none", "other", []),
    ("Acute fracture.", F, [], "none", "acute", []),
    ("There is a healed fracture.", F, [], "none", "healed", []),
    ("Findings concerning for fracture.", F, [], "none", "other", []),
    # Multiple locations
    ("Acute fractures of the left ribs and left clavicle.", F, ["ribs", "clavicle"], "left", "acute", []),
    ("Old right rib fractures. Healed right clavicle fracture.", F, ["ribs", "clavicle"], "right", "healed", []),
    ("Acute left rib fractures. Old right clavicle fracture.", F, ["ribs", "clavicle"], "both", "acute", []),
    ("Fractures of the left scapula and left humerus.", F, ["scapula", "shoulder"], "left", "other", []),
    ("Healed rib fractures and an old compression fracture of T7.", F, ["ribs", "spine"], "none", "healed", []),
    ("Sternotomy wires are fractured and there is an acute sternal fracture.", F, ["sternal wires", "sternum"], "none", "acute", []),
    # Implants
    ("Healed rib fractures with surgical plates.", F, ["ribs"], "none", "healed", ["plates"]),
    ("Right rib fractures fixated with plates and screws.", F, ["ribs"], "right", "other", ["screws", "plates"]),
    ("Fracture of the left clavicle, with hardware in place.", F, ["clavicle"], "left", "other", ["other"]),
    ("Spinal fusion rods traverse a healed thoracic fracture.", F, ["spine"], "none", "healed", ["rods"]),
    ("Acute fracture of the bilateral clavicle, with screws, rods, plates and hardware in place.", F, ["clavicle"], "both", "acute", ["screws", "rods", "plates", "other"]),
    # Negated / normal
    ("No acute fracture.", N, [], "none", "other", []),
    ("No evidence of fracture.", N, [], "none", "other", []),
    ("No acute displaced rib fractures are identified.", N, [], "none", "other", []),
    ("Negative for fracture.", N, [], "none", "other", []),
    ("Osseous structures are intact without fracture.", N, [], "none", "other", []),
    ("There is no evidence of rib fracture or pneumothorax.", N, [], "none", "other", []),
    ("A fracture is not seen.", N, [], "none", "other", []),
    ("Clavicle fracture is not identified on this study.", N, [], "none", "other", []),
    ("Sternal wires are intact. No fracture.", N, [], "none", "other", []),
    ("The lungs are clear. No displaced fractures are identified.", N, [], "none", "other", []),
    ("Bones are free of fracture.", N, [], "none", "other", []),
    ("Vertebral body heights are preserved without compression fracture.", N, [], "none", "other", []),
    ("No signs of fracture of the clavicles or ribs.", N, [], "none", "other", []),
    ("No radiographic evidence of acute fracture.", N, [], "none", "other", []),
    ("Rib fracture is absent.", N, [], "none", "other", []),
    ("No new fracture is identified.", N, [], "none", "other", []),
    ("No fracture is seen; the heart is normal in size.", N, [], "none", "other", []),
    # Scope breaks and mixed negation
    ("No effusion but acute rib fracture noted.", F, ["ribs"], "none", "acute", []),
    ("No pneumothorax; however, there is an old right rib fracture.", F, ["ribs"], "right", "healed", []),
    ("No acute fracture but healed left rib fractures are present.", F, ["ribs"], "left", "healed", []),
    ("No rib fracture; right clavicle fracture is seen.", F, ["clavicle"], "right", "other", []),
    ("No acute fracture. Old healed right rib fracture.", F, ["ribs"], "right", "healed", []),
    ("Without pneumothorax, although a new left scapular fracture is present.", F, ["scapula"], "left", "acute", []),
    ("No pleural effusion or pneumothorax. There is an acute fracture of the left ribs.", F, ["ribs"], "left", "acute", []),
    ("No focal consolidation, pleural effusion, pulmonary edema, cardiomegaly, or mediastinal widening, but a left rib fracture is seen.", F, ["ribs"], "left", "other", []),
    ("The chest is clear and there is no effusion, pneumothorax, consolidation, edema, mass, nodule or adenopathy in either lung field; a right clavicle fracture is present.", F, ["clavicle"], "right", "other", []),
    ("No change in the healed right rib fractures.", F, ["ribs"], "right", "healed", []),
    ("No significant change in the chronic T12 compression fracture.", F, ["spine"], "none", "healed", []),
    ("Acute left rib fractures without pneumothorax.", F, ["ribs"], "left", "acute", []),
    ("Fracture of the right clavicle without hardware.", F, ["clavicle"], "right", "other", []),
    # No fracture information
    ("", O, [], "none", "other", []),
    ("Heart size is normal.", O, [], "none", "other", []),
    ("The lungs are clear. No pleural effusion or pneumothorax.", O, [], "none", "other", []),
    ("Pectus excavatum deformity.", O, [], "none", "other", []),
    ("Mild cardiomegaly with pulmonary vascular congestion.", O, [], "none", "other", []),
    ("Median sternotomy wires are intact.", O, [], "none", "other", []),
    ("Left-sided pacemaker with leads in the right atrium and right ventricle.", O, [], "none", "other", []),
    ("Degenerative changes of the thoracic spine.", O, [], "none", "other", []),
    ("Right humeral head prosthesis in place.", O, [], "none", "other", []),
    ("No acute cardiopulmonary process.", O, [], "none", "other", []),
    ("Old granulomatous disease.", O, [], "none", "other", []),
    ("Bibasilar atelectasis, e.g. at the left base. Small left effusion measures 2.5 cm.", O, [], "none", "other", []),
    ("Compared to the prior study, the endotracheal tube has been removed.", O, [], "none", "other", []),
    # Multi-sentence reports with newlines
    ("FINDINGS:\nThe lungs are clear.\nThere is an acute fracture of the right clavicle.\nIMPRESSION:\nRight clavicle fracture.", F, ["clavicle"], "right", "acute", []),
    ("FINDINGS:\nNo pneumothorax.\nIMPRESSION:\nNo acute fracture.", N, [], "none", "other", []),
    ("1. No acute cardiopulmonary process. 2. Healed left rib fractures.", F, ["ribs"], "left", "healed", []),
    ("Sternotomy wires are intact. Old compression fracture of L1 is unchanged. No new fracture.", F, ["spine"], "none", "healed", []),
]


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "fracturelab" / "data" / "fixture_corpus.jsonl"
    lines = []
    for i, (text, tri, locs, side, stage, imps) in enumerate(ROWS, start=1):
        lines.append(json.dumps({
            "study_id": f"fx{i:03d}", "text": text, "tri_class": tri,
            "locations": locs, "side": side, "stage": stage, "implants": imps,
        }, ensure_ascii=False))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} rows to {out}")


if __name__ == "__main__":
    main()
