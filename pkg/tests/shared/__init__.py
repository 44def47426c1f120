from .network_fixtures import *
from .logging_helpers import *
