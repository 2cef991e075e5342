"""Joint sentiment and emotion tagging for short texts.

A shared BiLSTM feeds two task-specific attention stacks: word-level
attention over thesaurus-expanded candidate embeddings, then sentence-level
attention that pools the sequence for sigmoid classifier heads. The numeric
core (tensors, tape autodiff, Adam) lives in `emosent.nd` and has no
dependencies beyond numpy.
"""

__version__ = "0.1.0"
