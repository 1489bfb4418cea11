from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

from ..utils.error_handler import InvalidInputError

DEFAULT_ATTRIBUTES = ('hair color', 'age', 'clothing', 'appearance')


class Category(str, Enum):
    HUMAN = 'human'
    ANIMAL = 'animal'
    LANDSCAPE = 'landscape'


class RefinementSource(str, Enum):
    REMOTE = 'remote'
    STUB = 'stub'
    PASSTHROUGH = 'passthrough'


@dataclass(frozen=True)
class PromptTemplate:
    """
    Refinement request template

    The instruction has {prompt} and {category} slots; the checklist lists
    the visual attributes a human-content prompt must end up specifying.
    """
    instruction: str = (
        "Rewrite the following {category} video prompt so that it describes the scene "
        "with concrete visual details. Keep every name and every detail already given. "
        "Return only the rewritten prompt.\n"
        "Prompt: {prompt}"
    )
    checklist_instruction: str = (
        "The subject must be described with each of these attributes, as "
        "'attribute: value' clauses if they are not already mentioned: {attributes}."
    )
    enrichment_instruction: str = "Enrich the scene with setting, lighting and motion details."
    attributes: Tuple[str, ...] = DEFAULT_ATTRIBUTES

    def render(self, prompt: str, category: 'Category') -> str:
        if not prompt or not prompt.strip():
            raise InvalidInputError("Prompt must be nonempty")
        category = Category(category)
        lines = [self.instruction.format(prompt=prompt, category=category.value)]
        if category == Category.HUMAN:
            lines.append(self.checklist_instruction.format(attributes=', '.join(self.attributes)))
        else:
            lines.append(self.enrichment_instruction)
        return '\n'.join(lines)


@dataclass
class RefinedPrompt:
    """Refinement outcome"""
    original: str
    refined: str
    source: RefinementSource
    attributes: Dict[str, str] = field(default_factory=dict)
    category: Category = Category.HUMAN

    def __post_init__(self):
        if not self.refined:
            raise InvalidInputError("Refined prompt must be nonempty")
        self.source = RefinementSource(self.source)
        self.category = Category(self.category)

    def to_dict(self) -> Dict[str, object]:
        return {
            'original': self.original,
            'refined': self.refined,
            'source': self.source.value,
            'category': self.category.value,
            'attributes': dict(self.attributes),
        }
