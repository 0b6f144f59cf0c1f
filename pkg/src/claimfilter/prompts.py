"""Prompt templates for the generation protocols.

Templates are plain strings with named placeholders; rendering is pure so
identical requests produce byte-identical prompts. Two graph-prompt styles
ship: the few-shot commentary style for stronger chat models, and a
stricter instruction style for models that struggle to keep the adjacency
matrix square.
"""

from __future__ import annotations

GRAPH_TEMPLATE_DEFAULT = "graph-fewshot"
GRAPH_TEMPLATE_STRICT = "graph-strict"

_GRAPH_FEWSHOT = """\
I'm going to give you a question and a series of claims in response to the question.
I want you to create a dependency graph to represent the relationships between claims.
The set of vertices should be the set of claims. Then, if a claim "a" relies on another claim "b" to be considered true, include edge (b, a) in the graph (so a node's ancestors should contain all of its necessary assumptions).
Vertices that are "a priori" (e.g., assumptions given in the question, definitions, etc.), should not have ancestors.
Your final output will be an adjacency list.

Next, I'll give you some examples to make this clear.

Question: How many vertical asymptotes does the graph of $y=\\frac{{x}}{{x^2+1}}$ have?

claim 1: A function has vertical asymptotes exactly where its denominator equals zero.
claim 2: To solve for the vertical asymptotes of the function $y=\\frac{{x}}{{x^2+1}}$, we therefore must solve $x^2+1=0$.
claim 3: For all real values of $x$, $x^2+1 > 0$
claim 4: Thus, we conclude that the function $y=\\frac{{x}}{{x^2+1}}$ has no vertical asymptotes.

Desired Output:
[[0,0,0,0],[1,0,0,0],[0,1,0,0],[0,1,1,0]]

You should output an object like the one above without any other reasoning or formatting. In particular, you should output an array of n arrays, each of length n, where n is the number of claims. If claim j relies on the information from claim i, the jth array should have the ith entry = 1; otherwise this entry should be zero.
By convention, we never include a claim in its own adjacency list (we do not consider a claim to rely on itself).
Here, we're interested in the dependency between claims, not just the correctness. For this reason, it's also important to represent these dependencies even in the case that an answer is wrong.

Now, I'm going to give you another question and list of claims, as before. With all of this explanation in mind, I want you to output an adjacency list with no other reasoning.

Question: {question}

{claims}
"""

_GRAPH_STRICT = """\
You are a system designed to create dependency graphs for subclaims in response to a given question. Your output must strictly adhere to the following instructions:

1. Graph Description:
   - Represent the dependency relationships between subclaims as a directed graph.
   - Each subclaim is a vertex in the graph.
   - An edge (b -> a) exists if subclaim "a" depends on subclaim "b".
   - Subclaims that are "a priori" (e.g., assumptions or definitions) should not have any ancestors.

2. Output Format:
   - Provide your graph as an adjacency list of size NUM x NUM, where NUM is the number of subclaims (this will be given at the beginning of the prompt).
   - A value of 1 at position i in row j indicates that subclaim j depends on subclaim i.
   - A value of 0 indicates no dependency.
   - Ensure no claim depends on itself (diagonal entries must be 0).

3. Rules:
   - The adjacency list must be square, with n rows and n columns, where n is the exact number of subclaims provided.
   - The output must consist solely of the adjacency list (e.g., [[0,1,0],[0,0,1],[0,0,0]]); do not include explanations, commentary, or any other formatting.

4. Dependencies:
   - Consider explicit and implicit dependencies between subclaims. If subclaim j implicitly relies on subclaim i (even if not stated directly), include the edge (i -> j) in the graph.
   - Always represent dependencies, even if the subclaims are incorrect or contain logical errors.

Now provide your adjacency list for the following question and subclaims:

Question: {question}

NUM = {num}
Subclaims:
{claims}
"""

SCORE_CLAIMS = """\
You will get a list of claims and piece of text. For each claim, score whether the text supports, contradicts, or is unrelated to the claim. Directly return a jsonl, where each line is {{"id":[CLAIM_ID], "score":[SCORE]}}. Directly return the jsonl with no explanation or other formatting. For the [SCORE], return 1 for supports, -1 for contradicts, and 0 for unrelated. The claims are: {claims}

Text: {text}
"""

REPROMPT = """\
I am going to give you a question and some starter work. Please fill in the starter work to provide a complete answer to the question. Question: {question}, Starter Work: {starter_work}
"""

ALTERNATE_RESPONSE = """\
Answer the following question, showing your reasoning step by step.

Question: {question}
"""


def _numbered_claims(claims: list[str]) -> str:
    return "\n".join(f"claim {i + 1}: {text}" for i, text in enumerate(claims))


def render_graph_prompt(
    question: str, claims: list[str], template_id: str = GRAPH_TEMPLATE_DEFAULT
) -> str:
    if template_id == GRAPH_TEMPLATE_DEFAULT:
        return _GRAPH_FEWSHOT.format(
            question=question, claims=_numbered_claims(claims)
        )
    if template_id == GRAPH_TEMPLATE_STRICT:
        numbered = "\n".join(f"{i + 1}. {text}" for i, text in enumerate(claims))
        return _GRAPH_STRICT.format(
            question=question, num=len(claims), claims=numbered
        )
    raise ValueError(f"unknown graph template {template_id!r}")


def render_score_prompt(claims: list[str], text: str) -> str:
    listed = "; ".join(f"[{i}] {c}" for i, c in enumerate(claims))
    return SCORE_CLAIMS.format(claims=listed, text=text)


def render_reprompt(question: str, starter_claims: list[str]) -> str:
    starter = " ".join(starter_claims)
    return REPROMPT.format(question=question, starter_work=starter)


def render_alternate_prompt(question: str) -> str:
    return ALTERNATE_RESPONSE.format(question=question)
