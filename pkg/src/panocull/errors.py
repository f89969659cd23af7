"""Exception hierarchy shared by every stage."""

from __future__ import annotations


class PanoCullError(Exception):
    """Base class for all errors raised by panocull."""


# container


class ContainerError(PanoCullError):
    pass


class NotRiff(ContainerError):
    pass


class Truncated(ContainerError):
    pass


class BadForm(ContainerError):
    pass


class NoVideoStream(ContainerError):
    pass


class MissingHeader(ContainerError):
    pass


class OutOfRange(ContainerError, IndexError):
    pass


class DroppedFrame(ContainerError):
    pass


class NotJpeg(ContainerError):
    pass


# codec / raster


class CorruptStream(PanoCullError):
    pass


class UnsupportedMode(PanoCullError):
    pass


class UndecodableFrame(PanoCullError):
    pass


class TooSmall(PanoCullError, ValueError):
    pass


class BadInterval(PanoCullError, ValueError):
    pass


class EmptySelection(UserWarning):
    """Emitted (as a warning) when an interval selects no surviving frame."""


class IoFailure(PanoCullError, OSError):
    pass


class ConfigError(PanoCullError, ValueError):
    pass
