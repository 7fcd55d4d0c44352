"""
Settings configuration for the Gaze-Guided Generation Service
"""

import os
from typing import List


class Settings:
    """Application settings"""

    # API Configuration
    API_TITLE = "Gaze-Guided Text Generation API"
    API_VERSION = "1.0.0"
    API_DESCRIPTION = "Steer language model output toward higher or lower predicted reading effort"
    API_PREFIX = "/gazegen-api"

    # Server Configuration
    HOST = "0.0.0.0"
    PORT = 1433

    # CORS Configuration
    CORS_ORIGINS = [
        "http://localhost:3000",  # Frontend development
        "*"  # Fallback for development
    ]

    # File Paths (env overrides for default paths only)
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(__file__)))
    DATA_DIR = os.environ.get("GAZEGEN_DATA_DIR", os.path.join(BASE_DIR, "data"))
    CORPUS_FILE = os.path.join(DATA_DIR, "corpus", "fables.txt")
    PROMPTS_FILE = os.path.join(DATA_DIR, "prompts.json")
    LM_PATH = os.environ.get("GAZEGEN_LM_PATH", os.path.join(DATA_DIR, "models", "ngram.lm"))
    GAZE_MODEL_PATH = os.environ.get("GAZEGEN_GAZE_MODEL_PATH", os.path.join(DATA_DIR, "models", "gaze.model"))
    LEXICON_PATH = os.environ.get("GAZEGEN_LEXICON_PATH", os.path.join(DATA_DIR, "lexicon.tsv"))

    # Language model defaults
    LM_ORDER = 3
    LM_ALPHA = 0.01
    BPE_MERGES = 1500
    NGRAM_MAGIC = "GAZEGEN-NGRAM 1"
    LM_CACHE_SIZE = 4096  # contexts; each entry is one vocabulary-sized array
    TOKENIZER_CACHE_SIZE = 65536

    # Gaze model
    GAZE_MODEL_MAGIC = "GAZEGEN-GAZE 1"
    GAZE_FEATURE_NAMES = ["len_0", "len_1", "len_2", "zipf_0", "zipf_1", "zipf_2"]
    INCLUDE_SKIPPED_AS_ZERO = False  # skipped words are excluded from training targets
    GAZE_CACHE_SIZE = 65536  # word trigrams
    GAZE_TEST_FRACTION = 0.2

    # Decoder defaults
    DEFAULT_TOP_K = 8
    DEFAULT_BEAM_SIZE = 8
    DEFAULT_MAX_TOKENS = 40
    GAZE_WEIGHT_LIMIT = 5.0
    GAZE_WEIGHT_WARN = 3.0
    EXHAUSTIVE_SEARCH_LIMIT = 10 ** 6

    # Eye-tracking processing
    IDT_DISPERSION_DEG = 1.0
    IDT_MIN_DURATION_MS = 100.0
    SAMPLING_RATE_HZ = 1000.0
    PIXELS_PER_DEGREE = 40.0
    STRICT_FIRST_PASS = False  # first visit counts even after a later word was read

    # Text metrics
    ZIPF_UNKNOWN_FLOOR = 1.0
    MTLD_THRESHOLD = 0.72
    MTLD_MIN_TOKENS = 10

    # Analysis
    CI_Z = 1.96
    PREVALENCE_BUCKETS = 3
    GAZE_WEIGHT_REFERENCE = 0.0
    ANALYSIS_FORMULAS = {
        "gaze_weight": "fprt ~ gaze_weight + (1|reader)",
        "baseline": "fprt ~ word_length + word_prevalence + (1|reader)",
        "full": "fprt ~ gaze_weight + word_length + word_prevalence + (1|reader)",
    }

    # Logging Configuration
    LOG_LEVEL = os.environ.get("GAZEGEN_LOG_LEVEL", "INFO")
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @classmethod
    def get_cors_origins(cls) -> List[str]:
        """Get CORS origins list"""
        return cls.CORS_ORIGINS

    @classmethod
    def get_lm_path(cls) -> str:
        """Get default n-gram model path"""
        return cls.LM_PATH

    @classmethod
    def get_gaze_model_path(cls) -> str:
        """Get default gaze model path"""
        return cls.GAZE_MODEL_PATH

    @classmethod
    def get_lexicon_path(cls) -> str:
        """Get default frequency lexicon path"""
        return cls.LEXICON_PATH


# Global settings instance
settings = Settings()
