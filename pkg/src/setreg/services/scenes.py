#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Bundled scenes and mappings

Inputs shipped under ``setreg/data``.  A command-line argument is resolved as a file
path first and as a bundled name second.
"""

from importlib import resources
from pathlib import Path
from typing import List

from ..core.exceptions import SceneParseError
from ..core.mappings import SvMapping, load_mapping, parse_mapping
from ..core.scene import Scene, load_scene, parse_scene
from ..utils.error_handler import error_handler
from ..utils.logger import get_logger

logger = get_logger(__name__)

DATA_PACKAGE = "setreg.data"
SCENES = "scenes"
MAPPINGS = "mappings"


def _folder(kind: str):
    return resources.files(DATA_PACKAGE).joinpath(kind)


def bundled_names(kind: str = SCENES) -> List[str]:
    """Sorted names of the bundled inputs of one kind"""
    return sorted(
        entry.name[: -len(".json")]
        for entry in _folder(kind).iterdir()
        if entry.name.endswith(".json")
    )


def _bundled_text(kind: str, name: str) -> str:
    entry = _folder(kind).joinpath(f"{name}.json")
    if not entry.is_file():
        known = ", ".join(bundled_names(kind))
        raise SceneParseError(f"不存在的文件或内置名称 '{name}' (内置: {known})", path=name)
    return entry.read_text(encoding="utf-8")


def bundled_scene(name: str) -> Scene:
    return parse_scene(_bundled_text(SCENES, name), name=name)


def bundled_mapping(name: str) -> SvMapping:
    return parse_mapping(_bundled_text(MAPPINGS, name), name=name)


@error_handler("加载场景")
def resolve_scene(ref: str) -> Scene:
    """Scene from a file path or a bundled name"""
    path = Path(ref)
    if path.is_file():
        return load_scene(path)
    logger.debug(f"按内置场景名解析: {ref}")
    return bundled_scene(ref)


@error_handler("加载映射")
def resolve_mapping(ref: str) -> SvMapping:
    path = Path(ref)
    if path.is_file():
        return load_mapping(path)
    return bundled_mapping(ref)
