"""Command-line front end"""

from .commands import cmd_train, cmd_compare, cmd_cliffs, cmd_pseudo_inspect

__all__ = ['cmd_train', 'cmd_compare', 'cmd_cliffs', 'cmd_pseudo_inspect']
