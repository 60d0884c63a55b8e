"""
Grammar for the flat key=value configuration and metadata files.

A file is a sequence of assignments, one per line by convention::

    # comments run to the end of the line
    voxel_size = 0.5
    extrinsic = 0 0 0 0 0 0 1
    robust_kernel = huber
    estimate_bias_gravity = false

Vectors are two or more numbers separated by whitespace or the delimiter.
"""

from typing import Any

from pyparsing import (
    CaselessKeyword,
    Group,
    OneOrMore,
    Optional,
    ParseBaseException,
    ParseResults,
    ParserElement,
    Regex,
    Suppress,
    Word,
    ZeroOrMore,
    alphanums,
    alphas,
    pythonStyleComment,
)

from ..errors import ConfigError

ParserElement.enablePackrat()


class ConfigSyntax:
    """
    Tokens of the configuration grammar.
    """

    assign_op = "="
    delim = ","
    true_words = ("true", "on", "yes")
    false_words = ("false", "off", "no")

    def __init__(self, **kwargs):
        """
        Override default tokens with user-supplied values.

        :param kwargs: token names and their replacement values. Only
            attributes already defined on the class are accepted.
        """
        for key in kwargs:
            if hasattr(self, key):
                setattr(self, key, kwargs[key])


class ConfigGrammar:
    """
    A grammar for flat key=value files.

    The rules are annotated with their BNF equivalents.
    """

    def __init__(self, syntax: ConfigSyntax | None = None):
        self.syntax = syntax or ConfigSyntax()

    @property
    def key(self):
        """
        key ::= letter { letter | digit | "_" }
        """
        return Word(alphas, alphanums + "_")

    @property
    def number(self):
        """
        number ::= integer | real
        """
        return Regex(r"[-+]?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?").setParseAction(
            lambda t: _to_number(t[0])
        )

    @property
    def boolean(self):
        """
        boolean ::= "true" | "on" | "yes" | "false" | "off" | "no"
        """
        words = [CaselessKeyword(word) for word in self.syntax.true_words]
        words += [CaselessKeyword(word) for word in self.syntax.false_words]
        element = words[0]
        for word in words[1:]:
            element = element | word
        return element.setParseAction(lambda t: t[0].lower() in self.syntax.true_words)

    @property
    def vector(self):
        """
        vector ::= number { [delim] number }+
        """
        delim = Optional(Suppress(self.syntax.delim))
        return Group(self.number + OneOrMore(delim + self.number))

    @property
    def word(self):
        """
        word ::= letter { letter | digit | "_" | "-" | "." | "/" }
        """
        return Word(alphas, alphanums + "_-./")

    @property
    def value(self):
        """
        value ::= boolean | vector | number | word
        """
        return self.boolean | self.vector | self.number | self.word

    @property
    def assignment(self):
        """
        assignment ::= key "=" value
        """
        return Group(self.key + Suppress(self.syntax.assign_op) + self.value)

    @property
    def statements(self):
        """
        statements ::= { assignment }
        """
        return ZeroOrMore(self.assignment).ignore(pythonStyleComment)

    def parse(self, instring: str) -> dict[str, Any]:
        """
        Parse a configuration string into a flat dictionary.

        :param instring: the file contents.
        :return: a mapping of keys to booleans, numbers, tuples or strings.
        :raise ConfigError: on a syntax error or a repeated key.
        """
        try:
            parsed = self.statements.parseString(instring, parseAll=True)
        except ParseBaseException as error:
            raise ConfigError(
                "Malformed configuration at line {line}: {msg}".format(
                    line=error.lineno, msg=error.msg
                )
            ) from error
        result: dict[str, Any] = {}
        for key, value in parsed:
            if isinstance(value, ParseResults):
                value = tuple(float(component) for component in value)
            if key in result:
                raise ConfigError("Key '{key}' is assigned twice.".format(key=key))
            result[key] = value
        return result


def _to_number(token: str) -> int | float:
    if any(marker in token for marker in ".eE"):
        return float(token)
    return int(token)
