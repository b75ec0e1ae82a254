from ._posefit import *  # noqa: F401,F403
