from .artifact_writer import ArtifactWriter, to_jsonable

__all__ = ["ArtifactWriter", "to_jsonable"]
