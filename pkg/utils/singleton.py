import threading
from functools import wraps


def singleton(cls):
    """One shared instance per class; `reset()` drops it so the next call builds a fresh one"""
    instances = {}
    lock = threading.Lock()

    @wraps(cls, updated=())
    def get_instance(*args, **kwargs):
        with lock:
            if cls not in instances:
                instances[cls] = cls(*args, **kwargs)
            return instances[cls]

    def reset():
        with lock:
            instances.pop(cls, None)

    get_instance.reset = reset
    return get_instance
