"""mtpipe: corpus-to-curriculum data engineering for multilingual
translation training.

Builds direction-balanced parallel corpora, grows a byte-level BPE
vocabulary, packs fixed-length samples, schedules them through an
incremental interval curriculum, renders an instruction-tuning dataset,
and evaluates translations with BLEU and an LLM judge. Everything is
deterministic under a single root seed.
"""

__version__ = "0.1.0"
