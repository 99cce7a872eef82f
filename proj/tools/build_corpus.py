#!/usr/bin/env python3
# wrr: WebAssembly record-reduce-replay
# Copyright 2026 The wrr Authors.
# SPDX-License-Identifier: Apache-2.0
"""Regenerates corpus/*.wasm from the .wat sources (needs the wasmtime package)."""

import pathlib
import sys

import wasmtime

corpus = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent.parent / "corpus")
for wat in sorted(corpus.rglob("*.wat")):
    wat.with_suffix(".wasm").write_bytes(wasmtime.wat2wasm(wat.read_text()))
    print(wat.with_suffix(".wasm").name)
