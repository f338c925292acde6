# app/shared/services/artifact_writer.py
import csv
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Convierte modelos pydantic, arreglos numpy y complejos a tipos JSON"""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


class ArtifactWriter:
    """Emisión determinista de artefactos CSV y JSON en un directorio de salida"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.written = []

    def write_json(self, name: str, payload: Any) -> Path:
        """
        Escribir un JSON UTF-8 con claves ordenadas

        Args:
            name: Nombre del archivo dentro del directorio de salida
            payload: Estructura serializable (acepta modelos pydantic y numpy)

        Returns:
            Path: Ruta del archivo escrito
        """
        path = self.out_dir / name
        text = json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")
        self.written.append(path)
        logger.info(f"✅ Artefacto JSON escrito: {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.out_dir / name
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            count = 0
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
                count += 1
        self.written.append(path)
        logger.info(f"✅ Artefacto CSV escrito: {path} ({count} filas)")
        return path
