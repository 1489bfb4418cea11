from typing import Dict, List, Optional, Sequence
import logging
import re

from .prompt_template import DEFAULT_TEMPLATE, build_request
from .refiner_clients import RefinerClient
from ..models.prompt import Category, PromptTemplate, RefinedPrompt, RefinementSource

_WORD = re.compile(r"[\w'-]+")
_SENTENCE_END = re.compile(r"[.!?]\s*$")


def _opens_sentence(prompt: str, position: int) -> bool:
    before = prompt[:position]
    return not before.strip() or bool(_SENTENCE_END.search(before))


def name_tokens(prompt: str) -> List[str]:
    """
    Capitalized name runs of a prompt

    Runs of two or more capitalized words are names wherever they occur;
    a single capitalized word counts only when it does not open a sentence.
    """
    runs: List[List[re.Match]] = []
    previous = None
    for word in _WORD.finditer(prompt):
        if not word.group()[0].isupper():
            previous = None
            continue
        joined = previous is not None and prompt[previous.end():word.start()].isspace()
        if joined:
            runs[-1].append(word)
        else:
            runs.append([word])
        previous = word

    tokens = []
    for run in runs:
        token = prompt[run[0].start():run[-1].end()]
        if len(run) == 1 and (len(token) < 2 or _opens_sentence(prompt, run[0].start())):
            continue
        if token not in tokens:
            tokens.append(token)
    return tokens


def detect_attributes(text: str, attributes: Sequence[str]) -> Dict[str, str]:
    """Values of 'attribute: value' clauses found in the text"""
    found = {}
    for attribute in attributes:
        match = re.search(rf"\b{re.escape(attribute)}\s*:\s*([^,;.\n]+)", text, flags=re.IGNORECASE)
        if match:
            found[attribute] = match.group(1).strip()
    return found


class PromptRefiner:
    """
    Prompt refinement through a language model client

    Refinement never blocks generation: any client failure degrades to the
    original prompt with source 'passthrough'.
    """

    def __init__(self, template: Optional[PromptTemplate] = None):
        self.logger = logging.getLogger('PromptRefiner')
        self.template = template or DEFAULT_TEMPLATE

    def protect_names(self, original: str, refined: str) -> str:
        """Re-attach name tokens of the original that the refined text lost"""
        missing = [token for token in name_tokens(original) if token not in refined]
        if not missing:
            return refined
        self.logger.debug(f"Re-attaching dropped name tokens {missing}")
        return f"{refined.rstrip()} ({', '.join(missing)})"

    def refine(self, prompt: str, category: Category, client: RefinerClient) -> RefinedPrompt:
        """
        Refine a prompt

        Args:
            prompt: Nonempty user prompt
            category: Prompt category, selects the checklist
            client: Completion client

        Returns:
            RefinedPrompt tagged with the client's source, or passthrough on failure
        """
        category = Category(category)
        request = build_request(prompt, category, self.template)
        try:
            response = client.complete(request, prompt)
            if not response or not response.strip():
                raise ValueError("empty response")
            refined = self.protect_names(prompt, response.strip())
            source = client.source
        except Exception as e:
            self.logger.warning(f"Prompt refinement failed, using the original prompt: {str(e)}")
            refined = prompt
            source = RefinementSource.PASSTHROUGH

        return RefinedPrompt(
            original=prompt,
            refined=refined,
            source=source,
            attributes=detect_attributes(refined, self.template.attributes),
            category=category
        )
