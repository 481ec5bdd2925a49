"""End-to-end extraction: image + detections -> netlist, geometry, schematic."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import extraction, raster, vectorize
from .connectivity import (
    DEFAULT_PIN_TABLE,
    DetectionsDoc,
    assemble_netlist,
    assign_nets,
    load_detections,
    name_nets,
    pin_positions,
)
from .geometry import BBox, BitMask, ElementType, LabelMap, NetGeometry, Netlist
from .raster import GrayImage, ThresholdSpec
from .reconstruct import SchematicDoc, build_schematic


@dataclass
class PipelineConfig:
    threshold: ThresholdSpec = ThresholdSpec.otsu()
    invert: bool = False
    margin: int = 2
    snap: float = 6.0
    stroke_override: int | None = None
    turn_tolerance: float = 30.0
    max_deviation: float = 1.5
    infer_crossings: bool = False
    ignore_regions: tuple[BBox, ...] = ()

    def __post_init__(self):
        if self.margin < 0 or self.snap < 0:
            raise ValueError("pixel parameters must be non-negative")


@dataclass
class ExtractResult:
    netlist: Netlist
    net_names: dict[int, str]
    netgeoms: list[NetGeometry]
    schematic: SchematicDoc
    labelmap: LabelMap
    stroke: int
    resolutions: list[extraction.CrossingResolution]
    warnings: list[str] = field(default_factory=list)


def extract(
    image: GrayImage,
    doc: DetectionsDoc,
    config: PipelineConfig = PipelineConfig(),
    table=None,
) -> ExtractResult:
    table = table or DEFAULT_PIN_TABLE
    warnings: list[str] = []

    mask = raster.binarize(image, config.threshold, invert=config.invert)
    boxes = [d.bbox for d in doc.elements]
    mask = raster.subtract_regions(mask, boxes, config.margin)
    if config.ignore_regions:
        mask = raster.subtract_regions(mask, list(config.ignore_regions), config.margin)

    stroke = config.stroke_override or extraction.estimate_stroke_width(mask)
    lmap = extraction.connected_components(mask)
    if config.ignore_regions:
        lmap = extraction.bridge_regions(lmap, list(config.ignore_regions), stroke, config.margin)

    crosspoints = doc.crosspoints
    if config.infer_crossings and not crosspoints:
        skel = vectorize.skeletonize(mask)
        crosspoints = extraction.infer_crosspoints(mask, skel)
    lmap, resolutions = extraction.resolve_crossings(lmap, crosspoints, stroke)
    for res in resolutions:
        if res.degraded:
            warnings.append(
                f"crossing at ({res.at.x},{res.at.y}) left merged: {len(res.stubs)} stubs"
            )

    netgeoms = vectorize.vectorize_nets(lmap, config.turn_tolerance, config.max_deviation)

    pins = [p for det in doc.elements for p in pin_positions(det, table)]
    bindings, unbound = assign_nets(pins, netgeoms, config.snap)
    etype_of = {d.id: d.etype for d in doc.elements}
    for pin in unbound:
        etype = etype_of[pin.element_id]
        if etype.is_symbol:
            warnings.append(f"symbol {pin.element_id} pin is unbound; ignored")
    netlist = assemble_netlist(doc.elements, bindings, table=table)
    net_names = name_nets(doc.elements, bindings)

    named_geoms = [g for g in netgeoms if g.label in net_names]
    schematic = build_schematic(
        doc.elements,
        named_geoms,
        netlist,
        net_names,
        bindings=bindings,
        canvas=(image.width, image.height),
    )
    return ExtractResult(
        netlist=netlist,
        net_names=net_names,
        netgeoms=netgeoms,
        schematic=schematic,
        labelmap=lmap,
        stroke=stroke,
        resolutions=resolutions,
        warnings=warnings,
    )


def extract_paths(image_path, detections_path, config: PipelineConfig = PipelineConfig(), table=None):
    image = raster.load_image(image_path)
    doc = load_detections(detections_path)
    return extract(image, doc, config, table)


def netgeoms_to_dict(result: ExtractResult, width: int, height: int) -> dict:
    nets = []
    for g in result.netgeoms:
        nets.append(
            {
                "label": g.label,
                "name": result.net_names.get(g.label),
                "segments": [[s.a.x, s.a.y, s.b.x, s.b.y] for s in g.segments],
                "ends": [[p.x, p.y] for p in g.ends],
                "branches": [[p.x, p.y] for p in g.branches],
                "turns": [[p.x, p.y] for p in g.turns],
            }
        )
    return {"width": width, "height": height, "nets": nets}
