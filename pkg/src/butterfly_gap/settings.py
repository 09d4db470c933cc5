import configparser
import os
from ast import literal_eval
from typing import Optional, Union

Value = Union[str, int, float, bool]

_PACKAGE_DIR = os.path.dirname(os.path.abspath(__file__))


class Settings:
    """
    Numeric defaults of the package, read from ini files.

    Sections are named ``<type>.<id>``, where <type> is the concern
    (solver, simulation, crossing, output) and <id> the caller, for example
    ``crossing.monte_carlo``. A key missing from ``<type>.<id>`` is looked
    up in ``<type>.DEFAULT``.

    The packaged ``default.ini`` is always read; an optional user file is
    read on top of it and wins on every key it sets.
    """

    def __init__(self, filename: str = "default.ini", user_file: Optional[str] = None) -> None:
        """
        Parameters
        ----------
        filename: str
            Name of the ini file inside the package directory.
        user_file: str, optional
            Path of an ini file overriding the packaged values.

        Raises
        ------
        FileNotFoundError
            If either file does not exist.
        """
        self._config = configparser.ConfigParser()
        self._filename = filename
        self._user_file = user_file

        for path in filter(None, (os.path.join(_PACKAGE_DIR, filename), user_file)):
            if not os.path.isfile(path):
                raise FileNotFoundError(f"File {path} not found.")
            self._config.read(path)

    # DUNDER METHODS
    def __repr__(self) -> str:
        return f"Settings({self._filename!r}, user_file={self._user_file!r})"

    # FUNCTIONS
    @staticmethod
    def _fallback_section(section: str) -> str:
        return section.split(".")[0] + ".DEFAULT"

    def get(self, section: str, key: str) -> Value:
        """
        Value of ``key`` in ``section`` or in the matching DEFAULT section.

        Raises
        ------
        KeyError
            If neither section holds the key.

        Returns
        -------
        str, int, float, bool
            The value decoded as a Python literal, or the raw string when it
            is not one.
        """
        for candidate in (section, self._fallback_section(section)):
            raw = self._config.get(candidate, key, fallback=None)
            if raw is not None:
                break
        else:
            raise KeyError(f"Key {key} not found in section {section}")

        try:
            return literal_eval(raw)
        except (ValueError, SyntaxError):
            return raw

    def set(self, section: str, key: str, value: Value) -> None:
        """
        Store a value for this session.

        DEFAULT sections are read only; change them in a user file instead.

        Raises
        ------
        KeyError
            If ``section`` is a DEFAULT section.
        """
        if section.endswith(".DEFAULT"):
            raise KeyError("Changing settings in DEFAULT sections is not allowed.")
        if not self._config.has_section(section):
            self._config.add_section(section)
        self._config[section][key] = str(value)


_ACTIVE_SETTINGS: Optional[Settings] = None


def get_settings() -> Settings:
    """Return the active settings, loading the packaged defaults on first use."""
    global _ACTIVE_SETTINGS
    if _ACTIVE_SETTINGS is None:
        _ACTIVE_SETTINGS = Settings()
    return _ACTIVE_SETTINGS


def use_settings(settings: Optional[Settings]) -> None:
    """Replace the active settings, ``None`` goes back to the packaged defaults."""
    global _ACTIVE_SETTINGS
    _ACTIVE_SETTINGS = settings


def resolve(value, section: str, key: str):
    """Return ``value`` unless it is None, then look ``key`` up in ``section``."""
    if value is not None:
        return value
    return get_settings().get(section, key)
