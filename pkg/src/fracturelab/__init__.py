"""Rule-based fracture labels for chest X-ray reports, templating and evaluation."""

from .model import (
    FractureFinding,
    Implant,
    LabeledCorpus,
    Location,
    Prediction,
    PredictionSet,
    Provenance,
    ReportRecord,
    Side,
    Stage,
    TriClass,
    deserialize_finding,
    parse_enum,
    serialize_finding,
)
from .labeler import classify_report, extract_attributes, label_corpus, split_sentences
from .templater import render_corpus, render_finding

__version__ = "0.1.0"
