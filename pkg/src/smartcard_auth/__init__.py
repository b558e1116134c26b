"""Smart-card remote user authentication with check digits.

Four scheme variants (Hwang-Li, Shen-Lin-Hwang, Kumar, and the registration
number + check digit scheme), executable versions of the published attacks
on them, and an instrumented operation-count model.
"""

from .modmath import ZeroInverse, gen_prime, mod_exp, mod_inv, sample_exponent
from .primitives import SHA256, OwfHandle, ServerSecret, check_digit, shadow
from .schemes import (
    AuthDecision,
    Credential,
    LoginMessage,
    Mode,
    Reason,
    Registry,
    Scheme,
    SystemParams,
    authenticate,
    login,
    register,
    setup,
)

__all__ = [
    "AuthDecision",
    "Credential",
    "LoginMessage",
    "Mode",
    "OwfHandle",
    "Reason",
    "Registry",
    "SHA256",
    "Scheme",
    "ServerSecret",
    "SystemParams",
    "ZeroInverse",
    "authenticate",
    "check_digit",
    "gen_prime",
    "login",
    "mod_exp",
    "mod_inv",
    "register",
    "sample_exponent",
    "setup",
    "shadow",
]

__version__ = "0.1.0"
