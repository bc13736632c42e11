from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Sequence, Type
from pydantic import BaseModel

@dataclass
class Artifact:
    """What a command emits: a JSON payload, the same result as CSV rows, and an optional plot source."""
    payload: Any
    header: Sequence[str]
    rows: List[Sequence[Any]]
    plot: Any = None

@dataclass
class Command:
    name: str
    schema: Type[BaseModel]
    handler: Callable[[BaseModel, Any], Artifact]
    help: str = ""

class CommandRouter:
    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, schema: Type[BaseModel], help: str = ""):
        def decorator(func):
            self.commands[name] = Command(name, schema, func, help)
            return func
        return decorator

def record_rows(record: BaseModel) -> List[Sequence[Any]]:
    """field,value rows for a flat record."""
    rows = []
    for name, value in record:
        if isinstance(value, Enum): value = value.value
        rows.append((name, "" if value is None else value))
    return rows
