from ._vtlsim import *  # noqa: F401,F403
