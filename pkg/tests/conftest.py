import pytest

from tests.shared import *
