"""Planar poses, rigid transforms and angle helpers shared by every module."""
