"""Synthetic clone-pair benchmark generator.

Problems are drawn from a bank of java templates (gcd, sorts, searches,
string ops, accumulations). Each problem fixes semantic knobs (constants,
operators, guard clauses), so two problems sharing a template still differ
in what they compute. Variants of one problem apply tagged transformations:

    T1   whitespace/comment edits (token sequence unchanged)
    T2   systematic identifier renaming + cosmetic literal replacement
    ST3  independent-declaration reordering + one dead statement
    MT3  renaming + reordering + several dead statements
    T4   the template's alternative implementation form

Positives are same-problem pairs labeled with the strongest transformation
on either side; negatives are sampled cross-problem pairs.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .lexer import JAVA, tokenize

CLONE_TYPES = ("T1", "T2", "ST3", "MT3", "T4")
_TIER = {"base": 0, "T1": 1, "T2": 2, "ST3": 3, "MT3": 4, "T4": 5}
_TIER_NAME = {v: k for k, v in _TIER.items()}


@dataclass
class Template:
    name: str
    n_vars: int
    form_a: str
    form_b: str
    k_pool: Sequence[str]
    op_pool: Sequence[str] = ("+",)
    guards: Sequence[str] = ("",)

    def combos(self) -> List[Tuple[str, str, str]]:
        return list(itertools.product(self.k_pool, self.op_pool, self.guards))


_FN_NAMES = ["compute", "process", "calc", "evaluate", "run", "solve",
             "apply", "resolve", "handle", "measure", "reduce", "derive"]
_VAR_NAMES = ["a", "b", "c", "n", "m", "x", "y", "z", "val", "tmp", "acc",
              "res", "cnt", "idx", "pos", "lo", "hi", "left", "right",
              "total", "item", "cur", "best", "step"]
_DEAD_NAMES = ["unused", "spare", "extra", "padv", "scratch", "filler"]

_DECLS = ("int {d0} = {c0};", "int {d1} = {c1};")


TEMPLATES: List[Template] = [
    Template(
        "gcd", 2,
        form_a=(
            "int {fn}(int {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    while ({v1} != 0) {{\n"
            "        int {v2} = {v0} % {v1};\n"
            "        {v0} = {v1};\n"
            "        {v1} = {v2};\n"
            "    }}\n"
            "    return {v0} {op} {K};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v1} == 0) {{\n"
            "        return {v0} {op} {K};\n"
            "    }}\n"
            "    return {fn}({v1}, {v0} % {v1});\n"
            "}}"),
        k_pool=["1", "2", "3", "5", "7", "11", "13", "17"],
        op_pool=["+", "-", "*"],
        guards=["", "if ({v0} == 0) {{ return {K}; }}",
                "if ({v0} < {v1}) {{ int {v3} = {v0}; {v0} = {v1}; {v1} = {v3}; }}"],
    ),
    Template(
        "factorial", 1,
        form_a=(
            "long {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    long {v1} = 1;\n"
            "    for (int {v2} = 2; {v2} <= {v0}; {v2}++) {{\n"
            "        {v1} = {v1} * {v2} % {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "long {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v0} <= 1) {{\n"
            "        return 1;\n"
            "    }}\n"
            "    return {v0} * {fn}({v0} - 1) % {K};\n"
            "}}"),
        k_pool=["1000000007", "998244353", "10007", "65521", "4099", "7919"],
        guards=["", "if ({v0} < 0) {{ return 0; }}",
                "if ({v0} > 20) {{ {v0} = 20; }}"],
    ),
    Template(
        "fibonacci", 1,
        form_a=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    int {v2} = 1;\n"
            "    for (int {v3} = 0; {v3} < {v0}; {v3}++) {{\n"
            "        int nxt = {v1} {op} {v2};\n"
            "        {v1} = {v2};\n"
            "        {v2} = nxt % {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v0} < 2) {{\n"
            "        return {v0};\n"
            "    }}\n"
            "    return ({fn}({v0} - 1) {op} {fn}({v0} - 2)) % {K};\n"
            "}}"),
        k_pool=["1000000007", "9973", "8191", "2147483647", "104729"],
        op_pool=["+", "-"],
        guards=["", "if ({v0} == 0) {{ return 0; }}"],
    ),
    Template(
        "sum_range", 1,
        form_a=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    for (int {v2} = 0; {v2} < {v0}; {v2}++) {{\n"
            "        {v1} = {v1} + {v2} {op} {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    int {v2} = 0;\n"
            "    while ({v2} < {v0}) {{\n"
            "        {v1} = {v1} + {v2} {op} {K};\n"
            "        {v2}++;\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        k_pool=["2", "3", "5", "7", "11", "13"],
        op_pool=["*", "%", "+", "^"],
        guards=["", "if ({v0} < 0) {{ return -1; }}",
                "if ({v0} == 0) {{ return {K}; }}"],
    ),
    Template(
        "power_mod", 2,
        form_a=(
            "long {fn}(long {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    long {v2} = 1;\n"
            "    for (int {v3} = 0; {v3} < {v1}; {v3}++) {{\n"
            "        {v2} = {v2} * {v0} % {K};\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        form_b=(
            "long {fn}(long {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v1} == 0) {{\n"
            "        return 1;\n"
            "    }}\n"
            "    return {v0} * {fn}({v0}, {v1} - 1) % {K};\n"
            "}}"),
        k_pool=["1000000007", "998244353", "911382323", "972663749", "1004535809"],
        guards=["", "if ({v1} < 0) {{ return 0; }}"],
    ),
    Template(
        "array_extremum", 1,
        form_a=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = {v0}[0];\n"
            "    for (int {v2} = 1; {v2} < {v0}.length; {v2}++) {{\n"
            "        if ({v0}[{v2}] {op} {v1}) {{\n"
            "            {v1} = {v0}[{v2}];\n"
            "        }}\n"
            "    }}\n"
            "    return {v1} + {K};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = {v0}[0];\n"
            "    int {v2} = 1;\n"
            "    while ({v2} < {v0}.length) {{\n"
            "        if ({v0}[{v2}] {op} {v1}) {{\n"
            "            {v1} = {v0}[{v2}];\n"
            "        }}\n"
            "        {v2}++;\n"
            "    }}\n"
            "    return {v1} + {K};\n"
            "}}"),
        k_pool=["0", "1", "2", "10", "100"],
        op_pool=[">", "<", ">=", "<="],
        guards=["", "if ({v0}.length == 0) {{ return -{K}; }}"],
    ),
    Template(
        "array_sum", 1,
        form_a=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    for (int {v2} = 0; {v2} < {v0}.length; {v2}++) {{\n"
            "        {v1} {op}= {v0}[{v2}] + {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    for (int {v2} : {v0}) {{\n"
            "        {v1} {op}= {v2} + {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        k_pool=["0", "1", "2", "3", "5"],
        op_pool=["+", "^", "|", "&"],
        guards=["", "if ({v0} == null) {{ return 0; }}"],
    ),
    Template(
        "count_matches", 2,
        form_a=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    for (int {v3} = 0; {v3} < {v0}.length; {v3}++) {{\n"
            "        if ({v0}[{v3}] {op} {v1} + {K}) {{\n"
            "            {v2}++;\n"
            "        }}\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    int {v3} = 0;\n"
            "    while ({v3} < {v0}.length) {{\n"
            "        if ({v0}[{v3}] {op} {v1} + {K}) {{\n"
            "            {v2}++;\n"
            "        }}\n"
            "        {v3}++;\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        k_pool=["0", "1", "2", "5", "10"],
        op_pool=["==", "!=", ">", "<"],
        guards=["", "if ({v1} < 0) {{ return 0; }}"],
    ),
    Template(
        "linear_search", 2,
        form_a=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    for (int {v2} = 0; {v2} < {v0}.length; {v2}++) {{\n"
            "        if ({v0}[{v2}] == {v1}) {{\n"
            "            return {v2} {op} {K};\n"
            "        }}\n"
            "    }}\n"
            "    return -1;\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    while ({v2} < {v0}.length) {{\n"
            "        if ({v0}[{v2}] == {v1}) {{\n"
            "            return {v2} {op} {K};\n"
            "        }}\n"
            "        {v2}++;\n"
            "    }}\n"
            "    return -1;\n"
            "}}"),
        k_pool=["0", "1", "2", "7"],
        op_pool=["+", "*", "-"],
        guards=["", "if ({v0}.length == 0) {{ return -{K}; }}"],
    ),
    Template(
        "binary_search", 2,
        form_a=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    int {v3} = {v0}.length - 1;\n"
            "    while ({v2} <= {v3}) {{\n"
            "        int mid = ({v2} + {v3}) / 2;\n"
            "        if ({v0}[mid] == {v1}) {{\n"
            "            return mid;\n"
            "        }}\n"
            "        if ({v0}[mid] {op} {v1}) {{\n"
            "            {v2} = mid + 1;\n"
            "        }} else {{\n"
            "            {v3} = mid - 1;\n"
            "        }}\n"
            "    }}\n"
            "    return -{K};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    return helper{fn}({v0}, {v1}, 0, {v0}.length - 1);\n"
            "}}\n"
            "int helper{fn}(int[] {v0}, int {v1}, int {v2}, int {v3}) {{\n"
            "    if ({v2} > {v3}) {{\n"
            "        return -{K};\n"
            "    }}\n"
            "    int mid = ({v2} + {v3}) / 2;\n"
            "    if ({v0}[mid] == {v1}) {{\n"
            "        return mid;\n"
            "    }}\n"
            "    if ({v0}[mid] {op} {v1}) {{\n"
            "        return helper{fn}({v0}, {v1}, mid + 1, {v3});\n"
            "    }}\n"
            "    return helper{fn}({v0}, {v1}, {v2}, mid - 1);\n"
            "}}"),
        k_pool=["1", "2", "3"],
        op_pool=["<", ">"],
        guards=["", "if ({v0}.length == 0) {{ return -{K}; }}"],
    ),
    Template(
        "reverse_array", 1,
        form_a=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    int {v2} = {v0}.length - 1;\n"
            "    while ({v1} < {v2}) {{\n"
            "        int {v3} = {v0}[{v1}];\n"
            "        {v0}[{v1}] = {v0}[{v2}];\n"
            "        {v0}[{v2}] = {v3};\n"
            "        {v1} = {v1} + {K};\n"
            "        {v2} = {v2} - {K};\n"
            "    }}\n"
            "}}"),
        form_b=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = {v0}.length;\n"
            "    for (int {v2} = 0; {v2} < {v1} / 2; {v2} = {v2} + {K}) {{\n"
            "        int {v3} = {v0}[{v2}];\n"
            "        {v0}[{v2}] = {v0}[{v1} - 1 - {v2}];\n"
            "        {v0}[{v1} - 1 - {v2}] = {v3};\n"
            "    }}\n"
            "}}"),
        k_pool=["1"],
        op_pool=["+"],
        guards=["", "if ({v0} == null) {{ return; }}",
                "if ({v0}.length < 2) {{ return; }}"],
    ),
    Template(
        "bubble_sort", 1,
        form_a=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    for (int {v1} = 0; {v1} < {v0}.length - 1; {v1}++) {{\n"
            "        for (int {v2} = 0; {v2} < {v0}.length - 1 - {v1}; {v2}++) {{\n"
            "            if ({v0}[{v2}] {op} {v0}[{v2} + 1]) {{\n"
            "                int {v3} = {v0}[{v2}];\n"
            "                {v0}[{v2}] = {v0}[{v2} + 1];\n"
            "                {v0}[{v2} + 1] = {v3};\n"
            "            }}\n"
            "        }}\n"
            "    }}\n"
            "}}"),
        form_b=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    boolean moved = true;\n"
            "    while (moved) {{\n"
            "        moved = false;\n"
            "        for (int {v1} = 1; {v1} < {v0}.length; {v1}++) {{\n"
            "            if ({v0}[{v1} - 1] {op} {v0}[{v1}]) {{\n"
            "                int {v2} = {v0}[{v1} - 1];\n"
            "                {v0}[{v1} - 1] = {v0}[{v1}];\n"
            "                {v0}[{v1}] = {v2};\n"
            "                moved = true;\n"
            "            }}\n"
            "        }}\n"
            "    }}\n"
            "}}"),
        k_pool=["0"],
        op_pool=[">", "<"],
        guards=["", "if ({v0}.length < {K} + 2) {{ return; }}"],
    ),
    Template(
        "selection_sort", 1,
        form_a=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    for (int {v1} = 0; {v1} < {v0}.length; {v1}++) {{\n"
            "        int {v2} = {v1};\n"
            "        for (int {v3} = {v1} + 1; {v3} < {v0}.length; {v3}++) {{\n"
            "            if ({v0}[{v3}] {op} {v0}[{v2}]) {{\n"
            "                {v2} = {v3};\n"
            "            }}\n"
            "        }}\n"
            "        int t = {v0}[{v1}];\n"
            "        {v0}[{v1}] = {v0}[{v2}];\n"
            "        {v0}[{v2}] = t;\n"
            "    }}\n"
            "}}"),
        form_b=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    while ({v1} < {v0}.length) {{\n"
            "        int {v2} = {v1};\n"
            "        int {v3} = {v1} + 1;\n"
            "        while ({v3} < {v0}.length) {{\n"
            "            if ({v0}[{v3}] {op} {v0}[{v2}]) {{\n"
            "                {v2} = {v3};\n"
            "            }}\n"
            "            {v3}++;\n"
            "        }}\n"
            "        int t = {v0}[{v1}];\n"
            "        {v0}[{v1}] = {v0}[{v2}];\n"
            "        {v0}[{v2}] = t;\n"
            "        {v1}++;\n"
            "    }}\n"
            "}}"),
        k_pool=["0"],
        op_pool=["<", ">"],
        guards=["", "if ({v0}.length == 0) {{ return; }}"],
    ),
    Template(
        "insertion_sort", 1,
        form_a=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    for (int {v1} = 1; {v1} < {v0}.length; {v1}++) {{\n"
            "        int {v2} = {v0}[{v1}];\n"
            "        int {v3} = {v1} - 1;\n"
            "        while ({v3} >= 0 && {v0}[{v3}] {op} {v2}) {{\n"
            "            {v0}[{v3} + 1] = {v0}[{v3}];\n"
            "            {v3}--;\n"
            "        }}\n"
            "        {v0}[{v3} + 1] = {v2};\n"
            "    }}\n"
            "}}"),
        form_b=(
            "void {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 1;\n"
            "    while ({v1} < {v0}.length) {{\n"
            "        int {v2} = {v0}[{v1}];\n"
            "        int {v3} = {v1};\n"
            "        while ({v3} > 0 && {v0}[{v3} - 1] {op} {v2}) {{\n"
            "            {v0}[{v3}] = {v0}[{v3} - 1];\n"
            "            {v3}--;\n"
            "        }}\n"
            "        {v0}[{v3}] = {v2};\n"
            "        {v1}++;\n"
            "    }}\n"
            "}}"),
        k_pool=["0"],
        op_pool=[">", "<"],
        guards=["", "if ({v0}.length < 2) {{ return; }}"],
    ),
    Template(
        "string_reverse", 1,
        form_a=(
            "String {fn}(String {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    StringBuilder {v1} = new StringBuilder();\n"
            "    for (int {v2} = {v0}.length() - 1; {v2} >= 0; {v2}--) {{\n"
            "        {v1}.append({v0}.charAt({v2}));\n"
            "    }}\n"
            "    return {v1}.toString();\n"
            "}}"),
        form_b=(
            "String {fn}(String {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    char[] {v1} = {v0}.toCharArray();\n"
            "    int {v2} = 0;\n"
            "    int {v3} = {v1}.length - 1;\n"
            "    while ({v2} < {v3}) {{\n"
            "        char t = {v1}[{v2}];\n"
            "        {v1}[{v2}] = {v1}[{v3}];\n"
            "        {v1}[{v3}] = t;\n"
            "        {v2}++;\n"
            "        {v3}--;\n"
            "    }}\n"
            "    return new String({v1});\n"
            "}}"),
        k_pool=["0", "1"],
        op_pool=["+"],
        guards=["", "if ({v0} == null) {{ return \"\"; }}",
                "if ({v0}.length() <= {K}) {{ return {v0}; }}"],
    ),
    Template(
        "palindrome", 1,
        form_a=(
            "boolean {fn}(String {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    int {v2} = {v0}.length() - 1;\n"
            "    while ({v1} < {v2}) {{\n"
            "        if ({v0}.charAt({v1}) != {v0}.charAt({v2})) {{\n"
            "            return false;\n"
            "        }}\n"
            "        {v1} = {v1} + {K};\n"
            "        {v2} = {v2} - {K};\n"
            "    }}\n"
            "    return true;\n"
            "}}"),
        form_b=(
            "boolean {fn}(String {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    for (int {v1} = 0; {v1} < {v0}.length() / 2; {v1} = {v1} + {K}) {{\n"
            "        if ({v0}.charAt({v1}) != {v0}.charAt({v0}.length() - 1 - {v1})) {{\n"
            "            return false;\n"
            "        }}\n"
            "    }}\n"
            "    return true;\n"
            "}}"),
        k_pool=["1"],
        op_pool=["+"],
        guards=["", "if ({v0}.length() == 0) {{ return true; }}",
                "if ({v0} == null) {{ return false; }}"],
    ),
    Template(
        "char_count", 2,
        form_a=(
            "int {fn}(String {v0}, char {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    for (int {v3} = 0; {v3} < {v0}.length(); {v3}++) {{\n"
            "        if ({v0}.charAt({v3}) {op} {v1}) {{\n"
            "            {v2} = {v2} + {K};\n"
            "        }}\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        form_b=(
            "int {fn}(String {v0}, char {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    int {v3} = 0;\n"
            "    while ({v3} < {v0}.length()) {{\n"
            "        if ({v0}.charAt({v3}) {op} {v1}) {{\n"
            "            {v2} = {v2} + {K};\n"
            "        }}\n"
            "        {v3}++;\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        k_pool=["1", "2"],
        op_pool=["==", "!=", "<", ">"],
        guards=["", "if ({v0}.length() == 0) {{ return 0; }}"],
    ),
    Template(
        "digit_sum", 1,
        form_a=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    while ({v0} > 0) {{\n"
            "        {v1} = {v1} + {v0} % {K};\n"
            "        {v0} = {v0} / {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v0} <= 0) {{\n"
            "        return 0;\n"
            "    }}\n"
            "    return {v0} % {K} + {fn}({v0} / {K});\n"
            "}}"),
        k_pool=["10", "2", "8", "16", "7", "3"],
        guards=["", "if ({v0} < 0) {{ {v0} = -{v0}; }}"],
    ),
    Template(
        "is_prime", 1,
        form_a=(
            "boolean {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v0} < 2) {{\n"
            "        return false;\n"
            "    }}\n"
            "    for (int {v1} = 2; {v1} * {v1} <= {v0}; {v1}++) {{\n"
            "        if ({v0} % {v1} == 0) {{\n"
            "            return {v0} == {K};\n"
            "        }}\n"
            "    }}\n"
            "    return true;\n"
            "}}"),
        form_b=(
            "boolean {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    if ({v0} < 2) {{\n"
            "        return false;\n"
            "    }}\n"
            "    int {v1} = 2;\n"
            "    while ({v1} * {v1} <= {v0}) {{\n"
            "        if ({v0} % {v1} == 0) {{\n"
            "            return {v0} == {K};\n"
            "        }}\n"
            "        {v1}++;\n"
            "    }}\n"
            "    return true;\n"
            "}}"),
        k_pool=["4", "6", "8", "9", "12", "16"],
        guards=["", "if ({v0} == 2) {{ return true; }}"],
    ),
    Template(
        "average", 1,
        form_a=(
            "double {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    double {v1} = 0.0;\n"
            "    for (int {v2} = 0; {v2} < {v0}.length; {v2}++) {{\n"
            "        {v1} += {v0}[{v2}] {op} {K};\n"
            "    }}\n"
            "    return {v1} / {v0}.length;\n"
            "}}"),
        form_b=(
            "double {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    double {v1} = 0.0;\n"
            "    for (int {v2} : {v0}) {{\n"
            "        {v1} += {v2} {op} {K};\n"
            "    }}\n"
            "    return {v1} / {v0}.length;\n"
            "}}"),
        k_pool=["1", "2", "3", "10"],
        op_pool=["+", "-", "*"],
        guards=["", "if ({v0}.length == 0) {{ return 0.0; }}"],
    ),
    Template(
        "dot_product", 2,
        form_a=(
            "int {fn}(int[] {v0}, int[] {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    for (int {v3} = 0; {v3} < {v0}.length; {v3}++) {{\n"
            "        {v2} += {v0}[{v3}] * {v1}[{v3}] % {K};\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}, int[] {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = 0;\n"
            "    int {v3} = 0;\n"
            "    while ({v3} < {v0}.length) {{\n"
            "        {v2} += {v0}[{v3}] * {v1}[{v3}] % {K};\n"
            "        {v3}++;\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        k_pool=["10007", "65521", "997", "911", "787"],
        guards=["", "if ({v0}.length != {v1}.length) {{ return -1; }}"],
    ),
    Template(
        "clamp_scale", 2,
        form_a=(
            "int {fn}(int {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = {v0} {op} {v1};\n"
            "    if ({v2} > {K}) {{\n"
            "        {v2} = {K};\n"
            "    }}\n"
            "    if ({v2} < -{K}) {{\n"
            "        {v2} = -{K};\n"
            "    }}\n"
            "    return {v2};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}, int {v1}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v2} = {v0} {op} {v1};\n"
            "    {v2} = Math.min({v2}, {K});\n"
            "    {v2} = Math.max({v2}, -{K});\n"
            "    return {v2};\n"
            "}}"),
        k_pool=["100", "255", "1000", "4096", "32767"],
        op_pool=["*", "+", "-"],
        guards=["", "if ({v1} == 0) {{ return 0; }}"],
    ),
    Template(
        "count_bits", 1,
        form_a=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    while ({v0} != 0) {{\n"
            "        {v1} += {v0} & {K};\n"
            "        {v0} = {v0} >>> 1;\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = 0;\n"
            "    for (int {v2} = 0; {v2} < 32; {v2}++) {{\n"
            "        {v1} += ({v0} >>> {v2}) & {K};\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        k_pool=["1", "3", "7"],
        guards=["", "if ({v0} == 0) {{ return 0; }}"],
    ),
    Template(
        "running_mod", 1,
        form_a=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = {K};\n"
            "    for (int {v2} = 0; {v2} < {v0}.length; {v2}++) {{\n"
            "        {v1} = ({v1} {op} {v0}[{v2}]) % 9973;\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        form_b=(
            "int {fn}(int[] {v0}) {{\n"
            "    {decls}\n"
            "    {guard}\n"
            "    int {v1} = {K};\n"
            "    int {v2} = 0;\n"
            "    while ({v2} < {v0}.length) {{\n"
            "        {v1} = ({v1} {op} {v0}[{v2}]) % 9973;\n"
            "        {v2}++;\n"
            "    }}\n"
            "    return {v1};\n"
            "}}"),
        k_pool=["1", "7", "13", "31", "101"],
        op_pool=["*", "+", "^"],
        guards=["", "if ({v0}.length == 0) {{ return {K}; }}"],
    ),
]


@dataclass
class SyntheticPair:
    id1: str
    id2: str
    label: int
    clone_type: Optional[str] = None


@dataclass
class SyntheticBenchmark:
    functions: List[dict]                       # JSONL-ready records
    splits: Dict[str, List[SyntheticPair]]      # split -> pairs


def _pick_names(rng: np.random.Generator, pool: Sequence[str], count: int,
                suffix: str = "") -> List[str]:
    idx = rng.choice(len(pool), size=count, replace=False)
    return [pool[int(i)] + suffix for i in idx]


def _reformat(code: str, rng: np.random.Generator) -> str:
    """Whitespace/comment mutation preserving the token sequence (T1)."""
    tokens = tokenize(code, JAVA).tokens
    seps = [" ", "  ", "\n", "\n    ", "\n        ", " /* x */ ", " \t"]
    comments = [" // note\n", " /* step */ "]
    parts: List[str] = []
    if rng.random() < 0.5:
        parts.append("/* variant */\n")
    for i, tok in enumerate(tokens):
        parts.append(tok.text)
        if i < len(tokens) - 1:
            if rng.random() < 0.08:
                parts.append(comments[int(rng.integers(len(comments)))])
            else:
                parts.append(seps[int(rng.integers(len(seps)))])
    return "".join(parts)


def _render(template: Template, form: str, idents: Dict[str, str],
            knobs: Tuple[str, str, str], decl_order: Sequence[int],
            dead: Sequence[str], cosmetics: Sequence[str]) -> str:
    k, op, guard = knobs
    decls = [d.format(d0=idents["d0"], d1=idents["d1"],
                      c0=cosmetics[0], c1=cosmetics[1]) for d in _DECLS]
    decls = [decls[i] for i in decl_order] + list(dead)
    slots = dict(idents)
    slots.update({"K": k, "op": op})
    slots["guard"] = guard.format(**slots) if guard else ""
    slots["decls"] = "\n    ".join(decls)
    code = form.format(**slots)
    # drop blank guard lines so the base rendering stays tidy
    return "\n".join(line for line in code.splitlines() if line.strip())


def _variant_code(template: Template, knobs, problem_rng, variant_tag: str,
                  rng: np.random.Generator) -> str:
    """Render one variant; `problem_rng` replays the base style choices."""
    base_fn = _pick_names(problem_rng, _FN_NAMES, 1)[0]
    base_vars = _pick_names(problem_rng, _VAR_NAMES, 4)
    base_decl_names = _pick_names(problem_rng, _DEAD_NAMES, 2)
    base_cosm = [str(int(problem_rng.integers(0, 50))),
                 str(int(problem_rng.integers(50, 100)))]

    idents = {"fn": base_fn, "v0": base_vars[0], "v1": base_vars[1],
              "v2": base_vars[2], "v3": base_vars[3],
              "d0": base_decl_names[0], "d1": base_decl_names[1]}
    cosmetics = list(base_cosm)
    form = template.form_a
    decl_order = list(range(len(_DECLS)))
    dead: List[str] = []

    def rename():
        fresh_fn = _pick_names(rng, _FN_NAMES, 1, suffix=str(int(rng.integers(2, 9))))[0]
        fresh_vars = _pick_names(rng, _VAR_NAMES, 4, suffix=str(int(rng.integers(0, 4))))
        fresh_decls = _pick_names(rng, _DEAD_NAMES, 2, suffix="v")
        idents.update({"fn": fresh_fn, "v0": fresh_vars[0], "v1": fresh_vars[1],
                       "v2": fresh_vars[2], "v3": fresh_vars[3],
                       "d0": fresh_decls[0], "d1": fresh_decls[1]})
        cosmetics[0] = str(int(rng.integers(100, 150)))
        cosmetics[1] = str(int(rng.integers(150, 200)))

    def add_dead(count):
        for j in range(count):
            name = _DEAD_NAMES[int(rng.integers(len(_DEAD_NAMES)))] + f"{j}{int(rng.integers(10))}"
            dead.append(f"int {name} = {int(rng.integers(200, 300))};")

    if variant_tag == "T2":
        rename()
    elif variant_tag == "ST3":
        decl_order = list(rng.permutation(len(_DECLS)))
        add_dead(1)
    elif variant_tag == "MT3":
        rename()
        decl_order = list(rng.permutation(len(_DECLS)))
        add_dead(2 + int(rng.integers(2)))
    elif variant_tag == "T4":
        form = template.form_b

    code = _render(template, form, idents, knobs, decl_order, dead, cosmetics)
    if variant_tag == "T1":
        code = _reformat(code, rng)
    return code


_VARIANT_CYCLE = ["T1", "T2", "ST3", "MT3", "T4"]


def generate_benchmark(seed: int, n_problems: int, variants_per_problem: int,
                       negative_ratio: float = 1.0,
                       split_fractions: Tuple[float, float, float] = (0.7, 0.1, 0.2),
                       ) -> SyntheticBenchmark:
    """Problems partitioned by split; pairs never cross splits."""
    if n_problems < 2:
        raise ValueError("need at least two problems")
    rng = np.random.default_rng(seed)

    # assign distinct knob combos per problem within each template
    combo_iters = []
    for t in TEMPLATES:
        combos = t.combos()
        order = rng.permutation(len(combos))
        combo_iters.append([combos[int(i)] for i in order])
    combo_used = [0] * len(TEMPLATES)

    functions: List[dict] = []
    variants_of: Dict[int, List[Tuple[str, str]]] = {}
    for p in range(n_problems):
        t_idx = p % len(TEMPLATES)
        template = TEMPLATES[t_idx]
        combos = combo_iters[t_idx]
        knobs = combos[combo_used[t_idx] % len(combos)]
        combo_used[t_idx] += 1
        problem_seed = int(rng.integers(1 << 31))
        variants_of[p] = []
        for v in range(variants_per_problem):
            tag = "base" if v == 0 else _VARIANT_CYCLE[(v - 1) % len(_VARIANT_CYCLE)]
            problem_rng = np.random.default_rng(problem_seed)
            variant_rng = np.random.default_rng([problem_seed, v])
            code = _variant_code(template, knobs, problem_rng, tag, variant_rng)
            fid = f"p{p:04d}_v{v}"
            functions.append({
                "id": fid, "language": JAVA, "code": code,
                "file_path": f"synthetic/{template.name}/p{p:04d}.java",
                "start_line": 1, "end_line": code.count("\n") + 1,
            })
            variants_of[p].append((fid, tag))

    order = rng.permutation(n_problems)
    n_train = int(round(split_fractions[0] * n_problems))
    n_val = int(round(split_fractions[1] * n_problems))
    split_problems = {
        "train": [int(i) for i in order[:n_train]],
        "validation": [int(i) for i in order[n_train:n_train + n_val]],
        "test": [int(i) for i in order[n_train + n_val:]],
    }

    splits: Dict[str, List[SyntheticPair]] = {}
    for split, problems in split_problems.items():
        positives: List[SyntheticPair] = []
        for p in problems:
            vs = variants_of[p]
            for i in range(len(vs)):
                for j in range(i + 1, len(vs)):
                    tier = max(_TIER[vs[i][1]], _TIER[vs[j][1]])
                    ctype = _TIER_NAME[tier] if tier > 0 else None
                    positives.append(SyntheticPair(vs[i][0], vs[j][0], 1, ctype))
        negatives: List[SyntheticPair] = []
        target = int(round(len(positives) * negative_ratio))
        seen = set()
        attempts = 0
        while len(negatives) < target and attempts < target * 50 + 100:
            attempts += 1
            if len(problems) < 2:
                break
            pi, pj = rng.choice(len(problems), size=2, replace=False)
            p1, p2 = problems[int(pi)], problems[int(pj)]
            f1 = variants_of[p1][int(rng.integers(len(variants_of[p1])))][0]
            f2 = variants_of[p2][int(rng.integers(len(variants_of[p2])))][0]
            key = (f1, f2) if f1 < f2 else (f2, f1)
            if key in seen:
                continue
            seen.add(key)
            negatives.append(SyntheticPair(key[0], key[1], -1, None))
        splits[split] = positives + negatives
    return SyntheticBenchmark(functions, splits)


def generate_synthetic(seed: int, n_problems: int, variants_per_problem: int,
                       negative_ratio: float = 1.0) -> SyntheticBenchmark:
    """Single-split variant: every problem lands in 'train'."""
    return generate_benchmark(seed, n_problems, variants_per_problem,
                              negative_ratio, split_fractions=(1.0, 0.0, 0.0))


def write_benchmark(bench: SyntheticBenchmark, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "functions.jsonl"), "w", encoding="utf-8") as f:
        for rec in bench.functions:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    for split, pairs in bench.splits.items():
        path = os.path.join(out_dir, f"pairs_{split}.jsonl")
        with open(path, "w", encoding="utf-8") as f:
            for pair in pairs:
                rec = {"id1": pair.id1, "id2": pair.id2, "label": pair.label}
                if pair.clone_type:
                    rec["clone_type"] = pair.clone_type
                f.write(json.dumps(rec, sort_keys=True) + "\n")
