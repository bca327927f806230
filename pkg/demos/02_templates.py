"""
Canonical template sentences
============================

Structured findings render to one fixed sentence per location. The
labeler reads every rendered sentence back to the finding it came from,
which makes templated text a lossless stand-in for the structured label.
"""

import random

from fracturelab import extract_attributes, render_finding
from fracturelab.model import FractureFinding, Implant, Location, Side, Stage, TriClass, enumerate_findings

f = FractureFinding(TriClass.FRACTURE, {Location.RIBS, Location.CLAVICLE}, Side.LEFT, Stage.HEALED,
                    {Implant.PLATES, Implant.SCREWS})
text = render_finding(f)
print(text)
print(extract_attributes(text).without_evidence() == f)

print(repr(render_finding(FractureFinding(TriClass.NORMAL))))
print(repr(render_finding(FractureFinding(TriClass.OTHER))))

# A random sample of the full enumeration; the test suite checks all of it.
everything = list(enumerate_findings())
sample = random.Random(0).sample(everything, 500)
ok = sum(extract_attributes(render_finding(x)).without_evidence() == x for x in sample)
print(f"{len(everything)} well-formed findings, sample round trip {ok}/{len(sample)}")
