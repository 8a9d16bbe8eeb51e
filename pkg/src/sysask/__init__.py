"""Task-oriented information seeking: profile-augmented corpora, a
multi-attention seq2seq model that decides between asking clarification
questions and answering, evaluation metrics, and an interactive dialogue
service."""

__version__ = "0.1.0"
