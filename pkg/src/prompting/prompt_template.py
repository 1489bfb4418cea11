from typing import Optional

from ..models.prompt import Category, PromptTemplate

DEFAULT_TEMPLATE = PromptTemplate()


def build_request(prompt: str, category: Category, template: Optional[PromptTemplate] = None) -> str:
    """
    Render the refinement request for a prompt

    Args:
        prompt: Nonempty user prompt, embedded verbatim
        category: human prompts get the attribute checklist, others scene enrichment
        template: Alternative template

    Returns:
        Request text for a refiner client
    """
    return (template or DEFAULT_TEMPLATE).render(prompt, Category(category))
