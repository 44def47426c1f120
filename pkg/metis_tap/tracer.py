import uuid


class RunTracer:
    """
    Carries the identity of a single pipeline run into every log line written during that run.
    The run id is for log correlation only; it is never written to an output file.
    """

    def __init__(self,
                 command: str,
                 tags: list[str] = None,
                 kv: dict[str, str] = None,
                 run_id: str = None):
        self.command = command
        self.run_id = run_id if run_id else str(uuid.uuid4())
        self.tags = tags if tags else []
        self.kv = kv if kv else {}

    def serialise(self):
        return {**{'run_id': self.run_id,
                   'command': self.command,
                   'tags': self.tags}, **self.kv}


def init_tracing(command: str, **kv):
    return RunTracer(command=command, kv=kv)
