"""Reference external token-probability provider.

Wraps a seeded tiny neural language model (causal and masked variants)
behind the line-delimited JSON scoring protocol, for use as a subprocess
by pipelines that evaluate multiple-choice answers by per-token
log-probability.
"""

from .model import TinyTransformerLM, build_model
from .serve import handle_request, serve
from .session import MODES, AdapterError, AdapterSession, SessionConfig
from .vocab import BOS_ID, DEFAULT_BUCKETS, MASK_ID, NUM_SPECIALS, STOP_WORDS, WordVocab, tokenize

__version__ = "0.1.0"
