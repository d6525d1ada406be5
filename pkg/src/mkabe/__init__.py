"""Single-master-key monotone secret sharing and the attribute-based
encryption scheme built on it, with a Benaloh-Leichter reference scheme and
an executable security-game harness."""

from .abe import (Ciphertext, CommunityKeypair, PublicParams, decrypt, encrypt,
                  open_ciphertext, setup)
from .crypto import TEST, TINY, GroupParams, HashPrf, TablePrf, ZeroPrf, generate_params
from .errors import (IntegrityFailure, MkAbeError, NotSatisfied, ProtocolViolation,
                     SizeExceeded)
from .formula import Formula, ModifiedFormula, evaluate, normalize, parse, render
from .sss_advanced import (MasterKey, TransformResult, derive_share, reconstruct_advanced,
                           transform)
from .sss_standard import Share, Sharing, reconstruct_standard, share_standard

__version__ = "0.1.0"
