import io
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from core.models.fields import ScalarField

logger = logging.getLogger(__name__)


@dataclass
class GraphiqueConfig:
    width: int = 1100
    height: int = 500
    margin: int = 85
    axis_color: str = 'black'
    axis_width: int = 3
    line_color: str = 'black'
    line_width: int = 3
    tick_count: int = 5
    tick_size: int = 10
    font_size: int = 28
    small_font_size: int = 20
    text_color: str = 'black'
    label_spacing: int = 10


def _load_fonts(config: GraphiqueConfig):
    try:
        return (ImageFont.truetype("DejaVuSans-Bold.ttf", config.font_size),
                ImageFont.truetype("DejaVuSans.ttf", config.small_font_size))
    except OSError:
        logger.debug("DejaVu fonts not found, using the Pillow default font")
        return ImageFont.load_default(size=config.font_size), ImageFont.load_default(size=config.small_font_size)


def _span(values: Sequence[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    low, high = min(finite), max(finite)
    if high - low <= 1e-300 * max(1.0, abs(high)):
        pad = max(abs(high) * 0.05, 1e-12)
        return low - pad, high + pad
    return low, high


class Graphique:
    """
    Line graph of one diagnostic against time, drawn with Pillow.
    """
    def __init__(self, x_label: str, y_label: str, x_range: tuple[float, float],
                 y_range: tuple[float, float], config: Optional[GraphiqueConfig] = None):
        self.x_label = x_label
        self.y_label = y_label
        self.x_min, self.x_max = x_range
        self.y_min, self.y_max = y_range
        self.config = config or GraphiqueConfig()
        self.image: Image.Image = Image.new('RGBA', (self.config.width, self.config.height), (255, 255, 255, 255))
        self.draw: ImageDraw.ImageDraw = ImageDraw.Draw(self.image)
        self.font, self.font_small = _load_fonts(self.config)
        self.draw_graphique_axes()

    def _pixel(self, x: float, y: float) -> tuple[float, float]:
        c = self.config
        x_span = (self.x_max - self.x_min) or 1.0
        y_span = (self.y_max - self.y_min) or 1.0
        pixel_x = c.margin + (x - self.x_min) / x_span * (c.width - 2 * c.margin)
        # y axis inverted: top of the image is the maximum
        pixel_y = c.height - c.margin - (y - self.y_min) / y_span * (c.height - 2 * c.margin)
        return pixel_x, pixel_y

    def draw_graphique_axes(self):
        """Axes, ticks and labels for the current ranges."""
        c = self.config
        x_axis_y = c.height - c.margin
        self.draw.line([(c.margin, x_axis_y), (c.width - c.margin, x_axis_y)], fill=c.axis_color, width=c.axis_width)
        self.draw.line([(c.margin, c.margin), (c.margin, x_axis_y)], fill=c.axis_color, width=c.axis_width)

        xlabel_w = self.font.getlength(self.x_label)
        self.draw.text((c.width - c.margin - xlabel_w, x_axis_y + 40), self.x_label, fill=c.text_color, font=self.font)
        self.draw.text((15, 10), self.y_label, fill=c.text_color, font=self.font)

        for i in range(c.tick_count + 1):
            x_val = self.x_min + (self.x_max - self.x_min) * i / c.tick_count
            pixel_x, _ = self._pixel(x_val, self.y_min)
            self.draw.line([(pixel_x, x_axis_y), (pixel_x, x_axis_y + c.tick_size)], fill=c.axis_color, width=c.axis_width)
            label = f"{x_val:.3g}"
            text_w = self.font_small.getlength(label)
            # keep the label inside the margins
            label_x = max(c.margin, min(c.width - c.margin - text_w, pixel_x - text_w / 2))
            self.draw.text((label_x, x_axis_y + c.tick_size + c.label_spacing), label, fill=c.text_color,
                           font=self.font_small)

            y_val = self.y_min + (self.y_max - self.y_min) * i / c.tick_count
            _, pixel_y = self._pixel(self.x_min, y_val)
            self.draw.line([(c.margin - c.tick_size, pixel_y), (c.margin, pixel_y)], fill=c.axis_color, width=2)
            label = f"{y_val:.3g}"
            text_w = self.font_small.getlength(label)
            self.draw.text((max(0, c.margin - text_w - c.label_spacing - c.tick_size), pixel_y - c.small_font_size // 2),
                           label, fill=c.text_color, font=self.font_small)

    def plot_series(self, xs: Sequence[float], ys: Sequence[float]) -> None:
        """Polyline through the finite points; NaN values break the line."""
        segment: list[tuple[float, float]] = []
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                segment.append(self._pixel(x, y))
                continue
            self._flush(segment)
            segment = []
        self._flush(segment)

    def _flush(self, segment: list[tuple[float, float]]) -> None:
        if len(segment) > 1:
            self.draw.line(segment, fill=self.config.line_color, width=self.config.line_width)
        elif segment:
            x, y = segment[0]
            r = self.config.line_width
            self.draw.ellipse([(x - r, y - r), (x + r, y + r)], fill=self.config.line_color)


def series_graphique(times: Sequence[float], values: Sequence[float], label: str,
                     config: Optional[GraphiqueConfig] = None) -> Graphique:
    graphique = Graphique("t", label, _span(times), _span(values), config)
    graphique.plot_series(times, values)
    return graphique


def stacked_graphiques(times: Sequence[float], columns: dict[str, Sequence[float]],
                       config: Optional[GraphiqueConfig] = None) -> Image.Image:
    """One panel per column, stacked vertically; all-NaN columns are skipped."""
    config = config or GraphiqueConfig()
    panels = [series_graphique(times, values, name, config).image
              for name, values in columns.items() if any(math.isfinite(v) for v in values)]
    canvas = Image.new('RGBA', (config.width, max(1, len(panels)) * config.height), (255, 255, 255, 255))
    for i, panel in enumerate(panels):
        canvas.paste(panel, (0, i * config.height))
    return canvas


def field_image(field: ScalarField, scale: int = 4) -> Image.Image:
    """Blue-white-red map of a scalar field, symmetric about zero; x₁ runs left to right."""
    values = np.asarray(field.values)
    peak = float(np.abs(values).max())
    level = values / peak if peak > 0.0 else np.zeros_like(values)
    # rows are x₂ from top (largest) to bottom
    level = np.flipud(level.T)
    positive = np.clip(level, 0.0, 1.0)
    negative = np.clip(-level, 0.0, 1.0)
    rgb = np.stack([1.0 - negative, 1.0 - np.maximum(positive, negative), 1.0 - positive], axis=-1)
    image = Image.fromarray(np.round(255 * rgb).astype(np.uint8))
    return image.resize((image.width * scale, image.height * scale), Image.Resampling.NEAREST)


def png_bytes(image: Image.Image) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, format='PNG')
    return buffer.getvalue()
