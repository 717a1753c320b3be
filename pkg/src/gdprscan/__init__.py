"""Privacy-policy analysis toolkit.

Builds a corpus of privacy policies, trains subword embeddings and a
CNN segment classifier over the 18 GDPR disclosure requirements,
improves the classifier with margin-sampling active learning, and
measures disclosure coverage across a corpus.
"""

__version__ = "0.1.0"
