import pytest

from backend.app.core.prompts import PromptLibrary, default_prompts, render_string, template_fields
from backend.app.core.retriever import render_system_prompt
from backend.app.utils.exceptions import TemplateRenderError


class TestRenderString:
    def test_substitutes_every_placeholder(self):
        assert render_string("{a} and {b}", {"a": 1, "b": "two"}) == "1 and two"

    def test_missing_value(self):
        with pytest.raises(TemplateRenderError) as exc:
            render_string("{a} and {b}", {"a": 1})
        assert exc.value.details["missing"] == ["b"]

    def test_values_are_not_reinterpreted(self):
        assert render_string("[{a}]", {"a": "{b}"}) == "[{b}]"

    def test_escaped_braces(self):
        assert render_string("{{literal}} {a}", {"a": "x"}) == "{literal} x"

    @pytest.mark.parametrize("template", ["{a.b}", "{a[0]}", "{a!r}", "{a:>5}", "{0}", "{"])
    def test_only_bare_names(self, template):
        with pytest.raises(TemplateRenderError):
            template_fields(template)


class TestPromptLibrary:
    def test_bundled_templates_render(self):
        assert "Rewritten question:" in default_prompts.render("rewrite", request="where is my order")

    def test_missing_template(self, tmp_path):
        with pytest.raises(TemplateRenderError):
            PromptLibrary(tmp_path).load("reflection")

    def test_missing_asset_is_a_server_fault(self, tmp_path):
        with pytest.raises(TemplateRenderError) as exc:
            PromptLibrary(tmp_path).load("rewrite")
        assert exc.value.http_status == 500

    def test_custom_directory(self, tmp_path):
        (tmp_path / "rewrite.txt").write_text("Q: {request}", encoding="utf-8")
        assert PromptLibrary(tmp_path).render("rewrite", request="hi") == "Q: hi"

    def test_reflection_template_fields(self):
        fields = set(template_fields(default_prompts.load("reflection")))
        assert {"platform", "shop_id", "user_id", "scenario_desc", "formatted_messages", "memory_context"} <= fields


def test_system_prompt():
    prompt = render_system_prompt("mall", "shop-9", "u-42")
    assert prompt.startswith("Basic Information")
    assert "the shop_id of your store is shop-9" in prompt
    assert "the user_id of the customer you serve is u-42." in prompt
