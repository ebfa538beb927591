# Config file settings
CONFIG_DIR_NAME = 'injres'
CONFIG_FILE_NAME = 'verify.conf'

# Scenario defaults
DEFAULT_PRIME = 2
DEFAULT_WINDOW = (-6, 6)
DEFAULT_TORSION_BOUND = 12
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 0
DEFAULT_FORMAT = 'text'
REPORT_FORMATS = ('text', 'json')

# Engine settings
RESOLUTION_LENGTH = 8
SUPPORT_PRIME_BOUND = 11
INJECTIVE_PRIME_BOUND = 50
UNIT_ACTION_EXPONENT = 8
ENUMERATION_LIMIT = 2**16  # largest subgroup enumerated element by element

# Oracle limits
ORACLE_ELEMENT_LIMIT = 10**6
ORACLE_AMBIENT_LIMIT = 10**5
HOMOTOPY_CANDIDATE_LIMIT = 10**6
HOMOTOPY_COEFF_BOUND = 2
