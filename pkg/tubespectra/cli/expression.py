# -*- coding: utf-8 -*-
"""
Recursive descent parser for scalar functions of the arc length :code:`s`.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | 's' | FUNC '(' expr ')' | '(' expr ')'

    FUNC    := sin | cos | exp | sqrt | tanh | abs

:code:`^` binds tighter than unary minus on its left and is right
associative, i.e. :code:`-s^2 = -(s^2)` and :code:`2^3^2 = 2^9`.
"""

import collections
import re

import numpy as np

from tubespectra.utils.error import Error, ExitCodes


Token = collections.namedtuple('Token', ['kind', 'text', 'offset'])

FUNCTIONS = {
    'sin': np.sin,
    'cos': np.cos,
    'exp': np.exp,
    'sqrt': np.sqrt,
    'tanh': np.tanh,
    'abs': np.abs,
}

VARIABLE = 's'

TOKEN_PATTERN = re.compile(r'''
    (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<space>\s+)
''', re.VERBOSE)


# -----------------------------------------------------------------------------
class ExpressionError(Error):
    """Expression error ({})."""
    exit_code = ExitCodes.EXIT_ERROR


class ExpressionSyntaxError(ExpressionError):
    """Syntax error at byte offset {}: {}."""

    @property
    def offset(self):
        return self.args[0]


class UnknownIdentifier(ExpressionError):
    """Unknown identifier {!r} at byte offset {}."""

    @property
    def name(self):
        return self.args[0]

    @property
    def offset(self):
        return self.args[1]


# -----------------------------------------------------------------------------
class Node:
    """Base class of parse tree nodes."""

    def evaluate(self, s):
        raise NotImplementedError


class Number(Node):

    def __init__(self, value):
        self.value = value

    def evaluate(self, s):
        return self.value

    def __repr__(self):
        return 'Number({!r})'.format(self.value)


class Variable(Node):

    def evaluate(self, s):
        return s

    def __repr__(self):
        return 'Variable()'


class UnaryMinus(Node):

    def __init__(self, operand):
        self.operand = operand

    def evaluate(self, s):
        return -self.operand.evaluate(s)

    def __repr__(self):
        return 'UnaryMinus({!r})'.format(self.operand)


class BinaryOp(Node):

    OPERATORS = {
        '+': np.add,
        '-': np.subtract,
        '*': np.multiply,
        '/': np.true_divide,
        '^': np.power,
    }

    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, s):
        return self.OPERATORS[self.op](self.left.evaluate(s),
                                       self.right.evaluate(s))

    def __repr__(self):
        return 'BinaryOp({!r}, {!r}, {!r})'.format(self.op, self.left,
                                                   self.right)


class Call(Node):

    def __init__(self, name, argument):
        self.name = name
        self.argument = argument

    def evaluate(self, s):
        return FUNCTIONS[self.name](self.argument.evaluate(s))

    def __repr__(self):
        return 'Call({!r}, {!r})'.format(self.name, self.argument)


class Expression:
    """
    A parsed expression; calling it evaluates the tree (vectorized over
    :py:mod:`numpy` arrays).
    """

    def __init__(self, text, tree):
        self.text = text
        self.tree = tree

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all='ignore'):
            value = self.tree.evaluate(s)
        return np.asarray(value, dtype=float) + np.zeros_like(s)

    def __repr__(self):
        return '<Expression({!r})>'.format(self.text)


# -----------------------------------------------------------------------------
def tokenize(text):
    """
    Split :code:`text` into tokens. Offsets are byte offsets of the UTF-8
    encoded input.

    :raises ExpressionSyntaxError: on characters outside the grammar
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = TOKEN_PATTERN.match(text, pos)
        if not m:
            raise ExpressionSyntaxError(_byte_offset(text, pos),
                                        'unexpected character {!r}'.format(
                                            text[pos]))
        kind = m.lastgroup
        if kind != 'space':
            tokens.append(Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(Token('end', '', _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text, pos):
    return len(text[:pos].encode('utf-8'))


class Parser:

    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text):
        token = self.current
        if token.text != text:
            raise ExpressionSyntaxError(
                token.offset, 'expected {!r}, found {}'.format(
                    text, _describe(token)))
        return self.advance()

    def parse(self):
        tree = self.expr()
        if self.current.kind != 'end':
            raise ExpressionSyntaxError(
                self.current.offset,
                'unexpected {}'.format(_describe(self.current)))
        return tree

    def expr(self):
        node = self.term()
        while self.current.text in ('+', '-'):
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.current.text in ('*', '/'):
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self):
        if self.current.text == '-':
            self.advance()
            return UnaryMinus(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.current.text == '^':
            self.advance()
            return BinaryOp('^', base, self.unary())
        return base

    def primary(self):
        token = self.current
        if token.kind == 'number':
            self.advance()
            return Number(float(token.text))
        if token.kind == 'name':
            self.advance()
            if token.text == VARIABLE:
                return Variable()
            if token.text in FUNCTIONS:
                self.expect('(')
                argument = self.expr()
                self.expect(')')
                return Call(token.text, argument)
            raise UnknownIdentifier(token.text, token.offset)
        if token.text == '(':
            self.advance()
            node = self.expr()
            self.expect(')')
            return node
        raise ExpressionSyntaxError(
            token.offset, 'unexpected {}'.format(_describe(token)))


def _describe(token):
    if token.kind == 'end':
        return 'end of input'
    return repr(token.text)


def parse_expression(text):
    """
    Parse an expression in the variable :code:`s`.

    :param str text: Expression, e.g. :code:`'2 - s^2/(1+s^2)'`
    :rtype: :py:class:`Expression`
    :raises ExpressionSyntaxError: with the byte offset of the first error
    :raises UnknownIdentifier: with the name of an unknown identifier
    """
    return Expression(text, Parser(text).parse())
