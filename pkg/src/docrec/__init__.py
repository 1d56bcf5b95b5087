"""Document-to-record transcription at desk scale.

Learns to read rasterized documents back into the structured records that
produced them, with decoder inductive biases matched to the record's
structure: sequence, set, or graph.
"""

__version__ = "0.1.0"
