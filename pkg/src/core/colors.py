"""
Color scheme component for consistent console output formatting.
Provides colorama codes for the CLI's status lines.
"""

from colorama import Fore, Style


class Colors:
    """Color scheme for console output"""

    HEADER = Fore.CYAN + Style.BRIGHT
    SUCCESS = Fore.GREEN + Style.BRIGHT
    WARNING = Fore.YELLOW + Style.BRIGHT
    ERROR = Fore.RED + Style.BRIGHT
    INFO = Fore.BLUE + Style.BRIGHT
    DIM = Style.DIM
    RESET = Style.RESET_ALL


def status(tag: str, message: str, color: str = Colors.INFO) -> str:
    """Format a `[tag] message` status line"""
    return f"{color}[{tag}] {message}{Colors.RESET}"
