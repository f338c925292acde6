import logging
import threading
from collections import OrderedDict
from typing import Dict, Iterable, Optional, Tuple

from app.config.settings import settings
from app.modules.classical.models import TrajectoryBundle

logger = logging.getLogger(__name__)

BundleKey = Tuple[str, float, float, int]


class TrajectoryRepository:
    """
    Memoización de TrajectoryBundle protegida con lock.

    Clave: (huella del modelo, t redondeado a 12 cifras significativas, pasos).
    Desalojo LRU al superar max_size.
    """

    def __init__(self, max_size: Optional[int] = None):
        self.max_size = max_size or settings.bvp_cache_size
        self._store: "OrderedDict[BundleKey, TrajectoryBundle]" = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(model_key: str, t: complex, steps: int) -> BundleKey:
        t = complex(t)
        return (model_key, float(f"{t.real:.12g}"), float(f"{t.imag:.12g}"), int(steps))

    def get(self, key: BundleKey) -> Optional[TrajectoryBundle]:
        with self._lock:
            bundle = self._store.get(key)
            if bundle is None:
                self.misses += 1
                return None
            self._store.move_to_end(key)
            self.hits += 1
            return bundle

    def get_many(self, keys: Iterable[BundleKey]) -> Dict[BundleKey, TrajectoryBundle]:
        found = {}
        for key in keys:
            bundle = self.get(key)
            if bundle is not None:
                found[key] = bundle
        return found

    def put(self, key: BundleKey, bundle: TrajectoryBundle) -> None:
        with self._lock:
            self._store[key] = bundle
            self._store.move_to_end(key)
            while len(self._store) > self.max_size:
                self._store.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._store.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"size": len(self._store), "hits": self.hits, "misses": self.misses}


trajectory_cache = TrajectoryRepository()
