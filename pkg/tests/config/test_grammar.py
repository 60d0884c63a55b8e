from unittest import TestCase

from octlio.config import ConfigGrammar, ConfigSyntax
from octlio.errors import ConfigError


class TestConfigGrammar(TestCase):
    def setUp(self):
        self.parse = ConfigGrammar().parse

    def test_empty(self):
        self.assertEqual({}, self.parse(""))

    def test_comment_only(self):
        self.assertEqual({}, self.parse("# nothing here\n"))

    def test_integer(self):
        self.assertEqual({"knn_k": 5}, self.parse("knn_k = 5"))

    def test_real(self):
        self.assertEqual({"tau_merge": 0.1}, self.parse("tau_merge = 0.1"))

    def test_exponent(self):
        self.assertEqual({"damping": 1e-6}, self.parse("damping = 1e-6"))

    def test_negative(self):
        self.assertEqual({"offset": -2.5}, self.parse("offset = -2.5"))

    def test_booleans(self):
        expected = {"a": True, "b": False, "c": True, "d": False}
        self.assertEqual(expected, self.parse("a = true\nb = off\nc = YES\nd = no"))

    def test_vector_with_spaces(self):
        self.assertEqual({"gravity": (0.0, 0.0, -9.81)}, self.parse("gravity = 0 0 -9.81"))

    def test_vector_with_commas(self):
        self.assertEqual({"gravity": (0.0, 0.0, -9.81)}, self.parse("gravity = 0, 0, -9.81"))

    def test_word(self):
        self.assertEqual({"robust_kernel": "huber"}, self.parse("robust_kernel = huber"))

    def test_word_is_not_a_boolean_prefix(self):
        self.assertEqual({"robust_kernel": "none"}, self.parse("robust_kernel = none"))

    def test_trailing_comments(self):
        text = "voxel_size = 0.5   # meters\nn_max = 100 # count\n"
        self.assertEqual({"voxel_size": 0.5, "n_max": 100}, self.parse(text))

    def test_several_lines(self):
        text = "\n".join(["seed = 3", "extrinsic = 0 0 0 0 0 0 1", "timing = false", "random_mode = uniform"])
        expected = {
            "seed": 3,
            "extrinsic": (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
            "timing": False,
            "random_mode": "uniform",
        }
        self.assertEqual(expected, self.parse(text))

    def test_repeated_key(self):
        self.assertRaises(ConfigError, self.parse, "seed = 1\nseed = 2")

    def test_missing_value(self):
        self.assertRaises(ConfigError, self.parse, "seed =")

    def test_missing_operator(self):
        self.assertRaises(ConfigError, self.parse, "seed 1")


class TestConfigSyntax(TestCase):
    def test_override_assign_op(self):
        grammar = ConfigGrammar(ConfigSyntax(assign_op=":"))
        self.assertEqual({"seed": 4}, grammar.parse("seed : 4"))

    def test_override_true_words(self):
        grammar = ConfigGrammar(ConfigSyntax(true_words=("si",), false_words=("nein",)))
        self.assertEqual({"a": True, "b": False}, grammar.parse("a = si\nb = nein"))

    def test_unknown_token_ignored(self):
        syntax = ConfigSyntax(not_a_token="x")
        self.assertFalse(hasattr(syntax, "not_a_token"))
