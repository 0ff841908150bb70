"""Host-level error types raised by the VM's public operations.

Guest-level errors (exceptions raised *inside* guest programs) are not
Python exceptions; they are ExceptionValue payloads carried through the
kernel's handler search. Everything in this module is an error in how the
VM itself was driven.
"""


class VmError(Exception):
    """Base class for all host-level VM errors."""

    code = "bad_params"


class UnknownLanguage(VmError):
    code = "unknown_language"

    def __init__(self, language):
        super().__init__(f"no plugin registered for language {language!r}")
        self.language = language


class DuplicatePlugin(VmError):
    def __init__(self, language):
        super().__init__(f"plugin {language!r} already registered")
        self.language = language


class MissingCapability(VmError):
    def __init__(self, name):
        super().__init__(f"plugin descriptor lacks capability {name!r}")
        self.name = name


class CompileError(VmError):
    """Source failed to compile. Carries a 1-based source position."""

    code = "compile_error"

    def __init__(self, line, column, message):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class GuestSyntaxError(CompileError):
    """Parse-stage failure; first error wins, no recovery."""


class NotRunnable(VmError):
    code = "not_runnable"

    def __init__(self, pid):
        super().__init__(f"process {pid} is not runnable")
        self.pid = pid


class NotInterruptible(VmError):
    code = "not_runnable"

    def __init__(self, pid, state):
        super().__init__(f"process {pid} cannot be interrupted in state {state}")
        self.pid = pid


class InvalidBudget(VmError):
    def __init__(self, quantum):
        super().__init__(f"instruction budget must be >= 1, got {quantum!r}")


class StaleHandle(VmError):
    code = "stale_handle"

    def __init__(self, language, handle):
        super().__init__(f"no live object {handle!r} in heap {language!r}")
        self.language = language
        self.handle = handle


class NoSuchSlot(VmError):
    def __init__(self, name):
        super().__init__(f"object has no slot {name!r}")
        self.name = name


class NoSuchMethod(VmError):
    def __init__(self, selector):
        super().__init__(f"object has no method {selector!r}")
        self.selector = selector


class ArityChanged(VmError):
    code = "compile_error"

    def __init__(self, old_params, new_params):
        super().__init__(
            f"restart may not change the parameter list: {old_params} -> {new_params}"
        )
        self.old_params = old_params
        self.new_params = new_params


class BadIndex(VmError):
    def __init__(self, index):
        super().__init__(f"no frame at index {index!r}")
        self.index = index


class SessionClosed(VmError):
    code = "session_closed"

    def __init__(self, session_id):
        super().__init__(f"debug session {session_id} is closed")
        self.session_id = session_id


class NotSteppable(VmError):
    def __init__(self):
        super().__init__("stepping requires an interrupt session or a restarted frame")


class EvaluationError(VmError):
    """A tool-level evaluation raised a guest exception; carries it."""

    def __init__(self, exception):
        super().__init__(f"{exception.class_name}: {exception.message}")
        self.exception = exception


class InternalFault(VmError):
    """Kernel invariant violation; indicates a VM bug, never a guest error."""
