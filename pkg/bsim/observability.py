#!/usr/bin/env python3
"""
Observability Module
Handles logging setup, structured log records, operation tracing and APM statistics
"""
from collections import deque
from dataclasses import dataclass
from datetime import datetime
from functools import wraps
from threading import Lock
from typing import Any, Callable, Deque, Dict, Optional
import json
import logging
import time
import uuid

from bsim.config import Config

logger = logging.getLogger(__name__)

TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Kernels above this wall time are listed as slow in reports
SLOW_KERNEL_MS = 1000.0
RECENT_LIMIT = 10


@dataclass
class OperationStats:
    """Running timing totals of one traced kernel or command"""

    count: int = 0
    errors: int = 0
    total_ms: float = 0.0
    min_ms: float = float('inf')
    max_ms: float = 0.0
    last_executed: Optional[str] = None

    def add(self, duration_ms: float, failed: bool) -> None:
        self.count += 1
        self.errors += int(failed)
        self.total_ms += duration_ms
        self.min_ms = min(self.min_ms, duration_ms)
        self.max_ms = max(self.max_ms, duration_ms)
        self.last_executed = datetime.utcnow().isoformat()

    def summary(self) -> Dict[str, Any]:
        return {
            'count': self.count,
            'avg_duration_ms': round(self.total_ms / self.count, 3) if self.count else 0.0,
            'min_duration_ms': round(self.min_ms, 3) if self.count else 0.0,
            'max_duration_ms': round(self.max_ms, 3),
            'total_duration_ms': round(self.total_ms, 3),
            'errors': self.errors,
            'last_executed': self.last_executed,
        }


# traced kernels may run inside worker threads
_apm_lock = Lock()
_operations: Dict[str, OperationStats] = {}
_slow: Deque[Dict[str, Any]] = deque(maxlen=RECENT_LIMIT)
_failures: Deque[Dict[str, Any]] = deque(maxlen=RECENT_LIMIT)


def configure_logging() -> None:
    """Configure root logging from Config (text or JSON lines)"""
    if Config.LOG_FORMAT == 'json':
        fmt = '%(message)s'
    else:
        fmt = TEXT_FORMAT
    logging.basicConfig(level=Config.LOG_LEVEL, format=fmt, force=True)


def log_structured(level: str, message: str, **kwargs: Any) -> None:
    """Emit one structured record; JSON when LOG_FORMAT is json, key=value otherwise"""
    log_level = getattr(logging, level.upper())
    if Config.LOG_FORMAT == 'json':
        log_data = {
            'timestamp': datetime.utcnow().isoformat(),
            'level': level.upper(),
            'service': Config.APP_NAME,
            'version': Config.APP_VERSION,
            'message': message,
            **kwargs
        }
        logger.log(log_level, json.dumps(log_data, default=str))
    else:
        fields = ' '.join(f"{key}={value}" for key, value in kwargs.items())
        logger.log(log_level, f"{message} {fields}".rstrip())


def traced(operation_name: str) -> Callable:
    """Decorator that times a call, logs its outcome and records APM stats

    Args:
        operation_name: Name the operation is recorded under

    Returns:
        Callable: Decorator function
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            trace_id = uuid.uuid4().hex[:16]
            start_time = time.perf_counter()
            log_structured('DEBUG', f'Trace started: {operation_name}', trace_id=trace_id)
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration_ms = (time.perf_counter() - start_time) * 1000
                record_apm_operation(operation_name, duration_ms, error=str(e))
                log_structured('ERROR', f'Trace failed: {operation_name}', trace_id=trace_id,
                               duration_ms=round(duration_ms, 3), error=str(e))
                raise
            duration_ms = (time.perf_counter() - start_time) * 1000
            record_apm_operation(operation_name, duration_ms)
            log_structured('INFO', f'Trace completed: {operation_name}', trace_id=trace_id,
                           duration_ms=round(duration_ms, 3))
            return result

        return wrapper
    return decorator


def record_apm_operation(operation: str, duration_ms: float, error: Optional[str] = None) -> None:
    """Add one timed call to the statistics; `error` marks it failed"""
    with _apm_lock:
        _operations.setdefault(operation, OperationStats()).add(duration_ms, error is not None)
        if error is not None:
            _failures.append({'operation': operation, 'error': error, 'duration_ms': round(duration_ms, 3)})
        if duration_ms > SLOW_KERNEL_MS:
            _slow.append({'operation': operation, 'duration_ms': round(duration_ms, 3)})


def get_apm_stats() -> Dict[str, Any]:
    """Snapshot of per-operation timings for embedding in a report

    Returns:
        Dict[str, Any]: operation_stats, slow_operations, recent_errors and a summary
    """
    with _apm_lock:
        operations = {name: stats.summary() for name, stats in _operations.items()}
        slow, failures = list(_slow), list(_failures)
    return {
        'operation_stats': operations,
        'slow_operations': slow,
        'recent_errors': failures,
        'summary': {
            'total_operations': sum(stats['count'] for stats in operations.values()),
            'total_errors': sum(stats['errors'] for stats in operations.values()),
            'total_slow_operations': len(slow),
        },
    }


def reset_apm_stats() -> None:
    with _apm_lock:
        _operations.clear()
        _slow.clear()
        _failures.clear()
