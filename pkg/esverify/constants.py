import re

# Every candidate is 1 mod 24; the other classes fall to closed forms.
BASE_MODULUS = 24
BASE_RESIDUE = 1

# Closed-form residues (modulus -> residue) handled by the elementary identities.
CLOSED_FORM_RESIDUES = {3: 2, 4: 3, 8: 5}

POLICY_PRIMES = "primes"
POLICY_ALL_ODD_DIVISORS = "all-odd-divisors"
POLICY_CUSTOM = "custom"
DEFAULT_POLICY_MAX_MODULUS = 5000

CHECKPOINT_MAGIC = b"ESSV1"

# Shortened filter files share the filter line format under this suffix.
SHORTENED_SUFFIX = ".star"

# Above this bound fallback stops enumerating every decomposition.
DEFAULT_EXHAUSTIVE_LIMIT = 20_000
# Largest B*C*D (resp. A*B) the bounded equation search tries for big n.
DEFAULT_SEARCH_PRODUCT = 4_000
# Trial-division bound when looking for a proper divisor to scale from.
SCALING_FACTOR_BOUND = 1_000_000

THREADS_ENV = "ESVERIFY_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2
EXIT_TIMEOUT = 124
EXIT_INTERRUPTED = 130

# "1e12", "3e9": scientific limits with an integral power of ten.
SCI_LIMIT_RE = re.compile(r"^(\d+)[eE](\d+)$")
K_LIMIT_RE = re.compile(r"^[kK]=(\d+)$")

# Published #R_i for the wheel over the first i primes from 5 on.
PUBLISHED_WHEEL_SIZES = {
    (5,): 2,
    (5, 7): 6,
    (5, 7, 11): 34,
    (5, 7, 11, 13): 192,
    (5, 7, 11, 13, 17): 1507,
    (5, 7, 11, 13, 17, 19): 13380,
    (5, 7, 11, 13, 17, 19, 23): 147348,
}
