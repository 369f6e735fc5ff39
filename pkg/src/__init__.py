"""
SemiMol Engine
==============

Semi-supervised molecular property prediction: a target model trained on
labeled molecules plus pseudo-labeled ones, admitted by a learned instructor
under a self-adjusting confidence threshold.
"""

__version__ = "1.0.0"
__description__ = "Semi-supervised molecular property prediction with an instructor model"
