// Ledger browser: the contract is public, so this pane renders exactly
// what the credential-free endpoints return - blocks, the character
// store, and the state digest.

import { ApiClient } from "./api.js";
import { clear, h } from "./dom.js";
import type { BlockWire, CharacterRecordWire } from "./types.js";

function characterRow(record: CharacterRecordWire): HTMLElement {
  const c = record.character;
  return h("tr", {}, [
    h("td", {}, [String(record.character_id)]),
    h("td", {}, [c.name]),
    h("td", {}, [String(c.level)]),
    h("td", {}, [`${c.strength}/${c.armor}/${c.luck}/${c.vitality}`]),
    h("td", {}, [c.weakness]),
    h("td", {}, [record.origin_game]),
    h("td", {}, [String(record.uploaded_at)]),
  ]);
}

function blockRow(block: BlockWire): HTMLElement {
  const kinds = block.txs.map((tx) => tx.kind).join(", ") || "(empty)";
  return h("tr", {}, [
    h("td", {}, [String(block.height)]),
    h("td", { class: "digest" }, [block.digest.slice(0, 16)]),
    h("td", { class: "digest" }, [block.prev_digest.slice(0, 16)]),
    h("td", {}, [String(block.txs.length)]),
    h("td", {}, [kinds]),
  ]);
}

export class LedgerBrowser {
  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async render(): Promise<void> {
    const [digest, characters, blocks] = await Promise.all([
      this.api.stateDigest(),
      this.api.characters(),
      this.api.blocks(0),
    ]);
    clear(this.root);
    this.root.append(
      h("h2", {}, ["Genesis contract"]),
      h("p", { class: "digest" }, [`state digest ${digest}`]),
      h("h3", {}, [`Characters (${characters.characters.length})`]),
      h("table", {}, [
        h("thead", {}, [
          h("tr", {}, ["id", "name", "level", "str/arm/lck/vit", "weakness", "origin", "block"].map(
            (label) => h("th", {}, [label]),
          )),
        ]),
        h("tbody", {}, characters.characters.map(characterRow)),
      ]),
      h("h3", {}, [`Blocks (${blocks.blocks.length})`]),
      h("table", {}, [
        h("thead", {}, [
          h("tr", {}, ["height", "digest", "prev", "txs", "kinds"].map((label) =>
            h("th", {}, [label]),
          )),
        ]),
        h("tbody", {}, blocks.blocks.map(blockRow)),
      ]),
    );
  }
}
