"""Replay rendering: one deterministic PNG frame per logged control tick."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ScenarioError
from ..gridmap import FREE, OCCUPIED, OccupancyGridMap
from .scenario import resolve_map, scenario_from_dict

COLOR_FREE = (252, 252, 252)
COLOR_OCCUPIED = (40, 40, 40)
COLOR_UNKNOWN = (170, 170, 170)
COLOR_EGO = (235, 140, 30)
COLOR_OPPONENT = (120, 120, 120)
COLOR_SCAN = (80, 120, 235)
COLOR_PLAN = (40, 170, 60)
COLOR_MPC = (150, 60, 200)
COLOR_COLLIDED = (200, 40, 40)
COLOR_TEXT = (10, 10, 10)


@dataclass(frozen=True)
class RenderOptions:
    stride: int = 10          # render every stride-th tick
    scale: float = 1.0        # pixels per map cell
    vehicle_length: float = 0.58
    vehicle_width: float = 0.31


class FrameRenderer:
    """Maps world coordinates onto the rasterized background image."""

    def __init__(self, grid: OccupancyGridMap, options: RenderOptions):
        self.grid = grid
        self.options = options
        self.px_per_m = options.scale / grid.resolution
        self._background = self._render_background()

    @property
    def size(self) -> tuple[int, int]:
        return self._background.size

    def world_to_pixel(self, x: float, y: float) -> tuple[float, float]:
        """World point to image pixel; the image y-axis points down."""
        g = self.grid
        c, s = math.cos(g.origin.theta), math.sin(g.origin.theta)
        dx, dy = x - g.origin.x, y - g.origin.y
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        px = lx * self.px_per_m
        py = self._background.size[1] - ly * self.px_per_m
        return px, py

    def _render_background(self) -> Image.Image:
        cells = self.grid.cells
        rgb = np.empty((*cells.shape, 3), dtype=np.uint8)
        rgb[cells == FREE] = COLOR_FREE
        rgb[cells == OCCUPIED] = COLOR_OCCUPIED
        rgb[(cells != FREE) & (cells != OCCUPIED)] = COLOR_UNKNOWN
        img = Image.fromarray(rgb[::-1, :, :], mode="RGB")
        if self.options.scale != 1.0:
            w, h = img.size
            img = img.resize((int(w * self.options.scale),
                              int(h * self.options.scale)), Image.NEAREST)
        return img

    def draw_frame(self, record: dict, header: dict) -> Image.Image:
        img = self._background.copy()
        draw = ImageDraw.Draw(img)
        opts = self.options
        stride = header.get("scan_beam_stride", 30)

        for i, agent in enumerate(record["agents"]):
            x, y, theta = agent["pose"]
            if "scan" in agent:
                fov = header["scan_fov"][i]
                beams = header["scan_beams"][i]
                angles = np.linspace(-fov / 2, fov / 2, beams)[::stride]
                for rng, ang in zip(agent["scan"], angles):
                    ex = x + rng * math.cos(theta + ang)
                    ey = y + rng * math.sin(theta + ang)
                    draw.line([self.world_to_pixel(x, y),
                               self.world_to_pixel(ex, ey)],
                              fill=COLOR_SCAN, width=1)
            if "plan" in agent and len(agent["plan"]) >= 2:
                pts = [self.world_to_pixel(px, py) for px, py in agent["plan"]]
                draw.line(pts, fill=COLOR_PLAN, width=2)
            if "mpc_pred" in agent and len(agent["mpc_pred"]) >= 2:
                pts = [self.world_to_pixel(px, py)
                       for px, py in agent["mpc_pred"]]
                draw.line(pts, fill=COLOR_MPC, width=2)

        for i, agent in enumerate(record["agents"]):
            x, y, theta = agent["pose"]
            color = COLOR_EGO if i == 0 else COLOR_OPPONENT
            if agent.get("col"):
                color = COLOR_COLLIDED
            corners = _box_corners(x, y, theta, opts.vehicle_length,
                                   opts.vehicle_width)
            draw.polygon([self.world_to_pixel(cx, cy) for cx, cy in corners],
                         fill=color, outline=(0, 0, 0))

        lap_text = " | ".join(
            f"A{i}: lap {a['lap']}" + (" CRASH" if a.get("col") else "")
            for i, a in enumerate(record["agents"]))
        draw.text((6, 4), f"t={record['t']:7.2f}s  {lap_text}", fill=COLOR_TEXT)
        return img


def _box_corners(x, y, theta, length, width):
    c, s = math.cos(theta), math.sin(theta)
    hl, hw = length / 2, width / 2
    out = []
    for ox, oy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        out.append((x + c * ox - s * oy, y + s * ox + c * oy))
    return out


def replay_render(log_path, out_dir, options: RenderOptions = RenderOptions(),
                  map_override: OccupancyGridMap | None = None) -> list[str]:
    """Render every stride-th tick of a log to PNG frames; returns the paths."""
    log_path = Path(log_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    header = None
    renderer = None
    frames: list[str] = []
    with open(log_path) as f:
        for lineno, line in enumerate(f, start=1):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{log_path}:{lineno}: corrupt log line "
                                    f"({exc})") from exc
            if rec.get("type") == "header":
                header = rec
                if map_override is not None:
                    grid = map_override
                else:
                    shim = {"version": 1, "map": header["map"],
                            "track": header["track"], "agents": []}
                    grid = resolve_map(scenario_from_dict(shim))
                renderer = FrameRenderer(grid, options)
                continue
            if header is None:
                raise ScenarioError(f"{log_path}:{lineno}: tick before header")
            tick = rec["tick"]
            if tick % options.stride != 0:
                continue
            img = renderer.draw_frame(rec, header)
            path = out_dir / f"frame_{tick:06d}.png"
            img.save(path)
            frames.append(str(path))
    if header is None:
        raise ScenarioError(f"{log_path}: no header record found")
    return frames
