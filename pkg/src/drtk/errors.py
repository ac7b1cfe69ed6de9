"""Exception types raised across the toolkit."""


class DrtkError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DrtkError):
    """Invalid configuration value; carries the offending field name."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DegenerateFeature(DrtkError):
    """Feature map has fewer than 2 elements; standard deviation undefined."""


class ZeroVariance(DrtkError):
    """Operation requires a feature vector with nonzero spread."""


class ShapeMismatch(DrtkError):
    """Tensors or rasters that must share a shape do not."""


class InvalidLayer(DrtkError):
    """Requested layer key is not a tappable layer of the model."""


class InvalidLabel(DrtkError):
    """Label index outside the model's class range, or labels missing."""


class InvalidBox(DrtkError):
    """Degenerate bounding box (x2 <= x1 or y2 <= y1) or score outside [0, 1]."""


class EmptyReference(DrtkError):
    """Reference detection/segmentation set contains no annotations at all."""


class DatasetEmpty(DrtkError):
    """Dataset directory holds no usable labeled images."""


class LoadFailure(DrtkError):
    """Model checkpoint or target spec could not be loaded; message carries the path."""


class NotInFixture(DrtkError):
    """Mock API fixture has no recorded response for this image content hash."""


class TargetFailure(DrtkError):
    """A black-box target failed on one image; carries the image id."""

    def __init__(self, image_id, message):
        super().__init__(f"target failed on image {image_id!r}: {message}")
        self.image_id = image_id
