"""cuegen: desk-scale cued speech generation and CTC-based evaluation.

Subpackages map to the major subsystems: phoneme/cue domain types, the
synthetic cuer oracle, audio/landmark feature extraction, a minimal neural
core, the gesture generator and its transfer strategies, the recognizer used
as the evaluation instrument, alignment metrics, and the experiment pipeline.
"""

__version__ = "0.1.0"
