"""polyvm: a cooperative multi-language VM with live debugging tools."""

from .errors import (
    ArityChanged,
    BadIndex,
    CompileError,
    DuplicatePlugin,
    EvaluationError,
    GuestSyntaxError,
    InvalidBudget,
    MissingCapability,
    NoSuchMethod,
    NoSuchSlot,
    NotInterruptible,
    NotRunnable,
    NotSteppable,
    SessionClosed,
    StaleHandle,
    UnknownLanguage,
    VmError,
)
from .values import ConversionPolicy, ExceptionValue, ForeignRef, MopView, ObjectRef
from .plugins import (
    LanguagePlugin,
    PluginDescriptor,
    Registry,
    mop_display,
    mop_invoke,
    mop_reflect,
    mop_slot_get,
    standard_registry,
)
from .vm import DEFAULT_BUDGET, VM, GreenProcess
from .bridge import PipelineCell, PipelineResult, PipelineRun, run_pipeline
from .debug import DebugEvent, DebugSession, inspect_value

__version__ = "0.1.0"

__all__ = [
    "VM",
    "GreenProcess",
    "DEFAULT_BUDGET",
    "ConversionPolicy",
    "ExceptionValue",
    "ObjectRef",
    "ForeignRef",
    "MopView",
    "LanguagePlugin",
    "PluginDescriptor",
    "Registry",
    "standard_registry",
    "mop_reflect",
    "mop_slot_get",
    "mop_invoke",
    "mop_display",
    "PipelineCell",
    "PipelineResult",
    "PipelineRun",
    "run_pipeline",
    "DebugEvent",
    "DebugSession",
    "inspect_value",
    "VmError",
    "UnknownLanguage",
    "DuplicatePlugin",
    "MissingCapability",
    "CompileError",
    "GuestSyntaxError",
    "NotRunnable",
    "NotInterruptible",
    "InvalidBudget",
    "StaleHandle",
    "NoSuchSlot",
    "NoSuchMethod",
    "ArityChanged",
    "BadIndex",
    "SessionClosed",
    "NotSteppable",
    "EvaluationError",
]
