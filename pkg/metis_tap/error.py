VALIDATION_FAILURE = 1
STORAGE_FAILURE = 2


class BaseError(Exception):

    def __init__(self,
                 message="",
                 name="",
                 ctx=None,
                 request_kwargs: dict = None,
                 traceback=None,
                 code=None,
                 klass="",
                 exception_klass=None,
                 retryable=False):
        self.code = type(self).default_code if code is None else code
        self.retryable = retryable
        self.message = message
        self.name = name
        self.ctx = ctx if ctx else {}
        self.klass = klass
        self.exception_klass = exception_klass
        self.traceback = traceback
        self.request_kwargs = request_kwargs if request_kwargs else {}
        super().__init__(self.message)

    default_code = VALIDATION_FAILURE

    def error(self):
        return {'error': self.message, 'code': self.code, 'step': self.name, 'ctx': self.ctx}

    def at_step(self, name: str):
        if not self.name:
            self.name = name
        return self


class ValidationError(BaseError):
    default_code = VALIDATION_FAILURE


class StorageError(BaseError):
    default_code = STORAGE_FAILURE


class ConfigError(ValidationError):
    ...


#
# Graph Core
#
class GraphError(ValidationError):
    ...


class UnknownVertex(GraphError):
    ...


class VertexKindMismatch(GraphError):
    ...


class DuplicateVertexId(GraphError):
    ...


class InvalidInterval(GraphError):
    ...


class UndeclaredRelationType(GraphError):
    ...


class SealedBundle(GraphError):
    ...


class HeterogeneityError(GraphError):
    ...


#
# Ingest
#
class IngestError(ValidationError):
    ...


class ManifestError(IngestError):
    ...


class MalformedRecords(IngestError):
    ...


#
# Similarity and Merging
#
class TapError(ValidationError):
    ...


class FutureDatedEdge(TapError):
    ...


class InvalidThreshold(TapError):
    ...


class MergeError(ValidationError):
    ...


class OverlappingGroups(MergeError):
    ...


class InvalidGroup(MergeError):
    ...


class StalePlan(MergeError):
    ...


class OracleError(ValidationError):
    ...


class InstanceTooLarge(OracleError):
    ...
