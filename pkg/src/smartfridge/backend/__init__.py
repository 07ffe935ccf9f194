from .auth import DuplicateUser, TokenTable, UserStore
from .recipes import CatalogError, load_catalog, suggest_recipes
from .service import BackendConfig, BackendService
from .store import SchemaViolation, Store, validate_detection, validate_env

__all__ = [
    "BackendConfig",
    "BackendService",
    "CatalogError",
    "DuplicateUser",
    "SchemaViolation",
    "Store",
    "TokenTable",
    "UserStore",
    "load_catalog",
    "suggest_recipes",
    "validate_detection",
    "validate_env",
]
