import threading
from collections import OrderedDict
from typing import Optional, Tuple

from app.modules.deformation.models import DeformationKernel

KernelKey = Tuple[str, float, float, int, int, int]


class KernelRepository:
    """Caché LRU pequeña de matrices de deformación ya construidas"""

    def __init__(self, max_size: int = 16):
        self.max_size = max_size
        self._store: "OrderedDict[KernelKey, DeformationKernel]" = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def key(model_key: str, t: complex, quadrature_order: int, grid_nodes: int, steps: int) -> KernelKey:
        t = complex(t)
        return (model_key, float(f"{t.real:.12g}"), float(f"{t.imag:.12g}"),
                int(quadrature_order), int(grid_nodes), int(steps))

    def get(self, key: KernelKey) -> Optional[DeformationKernel]:
        with self._lock:
            kernel = self._store.get(key)
            if kernel is not None:
                self._store.move_to_end(key)
            return kernel

    def put(self, key: KernelKey, kernel: DeformationKernel) -> None:
        with self._lock:
            self._store[key] = kernel
            self._store.move_to_end(key)
            while len(self._store) > self.max_size:
                self._store.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._store.clear()

    def size(self) -> int:
        with self._lock:
            return len(self._store)


kernel_cache = KernelRepository()
