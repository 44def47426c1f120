import json
import decimal
from enum import Enum
from pathlib import Path

import pendulum


class CustomLogEncoder(json.JSONEncoder):
    def default(self, obj):
        match obj:
            case pendulum.DateTime():
                return obj.to_iso8601_string()
            case decimal.Decimal():
                return str(obj)
            case Path():
                return str(obj)
            case Enum():
                return obj.value
            case set() | frozenset():
                return sorted(obj)
            case _:
                return json.JSONEncoder.default(self, obj)
